"""Exact symbolic expressions.

An :class:`Expression` is a quotient of two sparse rational polynomials whose
variables are atoms: symbols (independent variables, jet coordinates,
constants), opaque function kernels with a declared dependency list (and
their derivative nodes ``df(f, x, 2)``), and opaque unary functions such as
``exp(u_x)``.  Every constructor returns the canonical form, so ``==`` is
structural and :func:`is_zero` only has to look at the numerator.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .poly import (
    APP,
    FN,
    SYM,
    poly_gcd,
    Atom,
    Monomial,
    Poly,
    lex_key,
    mono_degree,
    mono_div,
    mono_gcd,
    )


class ExpressionError(ValueError):
    """Raised for malformed or unsupported symbolic operations."""


class NotPolynomialError(ExpressionError):
    def __init__(self, message: str, subterm: Optional["Expression"] = None):
        super().__init__(message)
        self.subterm = subterm


UNARY_FUNCTIONS = ("exp", "log", "sin", "cos", "tan", "sinh", "cosh", "sqrt", "atan")


def _lcm_mono(a: Monomial, b: Monomial) -> Monomial:
    d = dict(a)
    for v, e in b:
        if d.get(v, 0) < e:
            d[v] = e
    return tuple(sorted(d.items()))


class Expression:
    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Poly, den: Optional[Poly] = None, _canonical: bool = False):
        if den is None or _canonical:
            self.num = num
            self.den = den if den is not None else Poly.const(1)
        else:
            self.num, self.den = _normalize(num, den)
        self._hash = None

    # constructors ------------------------------------------------------------
    @staticmethod
    def const(c) -> "Expression":
        return Expression(Poly.const(c))

    @staticmethod
    def symbol(name: str) -> "Expression":
        return Expression(Poly.atom((SYM, name)))

    @staticmethod
    def kernel(name: str, deps: Sequence[str] = (), derivs: Sequence[str] = ()) -> "Expression":
        deps = tuple(deps)
        order = {d: i for i, d in enumerate(deps)}
        for d in derivs:
            if d not in order:
                raise ExpressionError(f"{name} does not depend on {d}")
        derivs = tuple(sorted(derivs, key=order.__getitem__))
        return Expression(Poly.atom((FN, name, deps, derivs)))

    @staticmethod
    def apply(fname: str, arg: "Expression") -> "Expression":
        if fname not in UNARY_FUNCTIONS:
            raise ExpressionError(f"unknown function {fname!r}")
        return Expression(Poly.atom((APP, fname, arg.key())))

    @staticmethod
    def from_atom(atom: Atom) -> "Expression":
        return Expression(Poly.atom(atom))

    @staticmethod
    def from_key(key) -> "Expression":
        num, den = key
        return Expression(Poly(dict(num)), Poly(dict(den)), _canonical=True)

    # basic protocol ----------------------------------------------------------------
    def key(self):
        return (self.num.key(), self.den.key())

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Expression.const(other)
        if not isinstance(other, Expression):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def __lt__(self, other: "Expression"):
        return self.sort_key() < other.sort_key()

    def sort_key(self):
        return (
            tuple(sorted(lex_key(m) for m in self.num.terms)),
            tuple(sorted(lex_key(m) for m in self.den.terms)),
            self.key(),
        )

    def __repr__(self):
        return f"Expression({to_string(self)!r})"

    def __str__(self):
        return to_string(self)

    def __bool__(self):
        return not self.num.is_zero()

    # arithmetic ----------------------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        if other.num.is_zero():
            return self
        if self.num.is_zero():
            return other
        if self.den == other.den:
            return Expression(self.num + other.num, self.den)
        d1, d2 = self.den, other.den
        if d1.is_monomial() and d2.is_monomial():
            (m1, c1), = d1.terms.items()
            (m2, c2), = d2.terms.items()
            lcm = _lcm_mono(m1, m2)
            n = self.num.mul_mono(mono_div(lcm, m1), Fraction(1) / c1) + other.num.mul_mono(
                mono_div(lcm, m2), Fraction(1) / c2
            )
            return Expression(n, Poly({lcm: 1}))
        g = poly_gcd(d1, d2)
        if not g.is_const():
            c1, c2 = d1.exact_div(g), d2.exact_div(g)
            return Expression(self.num * c2 + other.num * c1, c1 * d2)
        return Expression(self.num * d2 + other.num * d1, d1 * d2)

    __radd__ = __add__

    def __neg__(self):
        return Expression(-self.num, self.den, _canonical=True)

    def __sub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        if self.num.is_zero() or other.num.is_zero():
            return ZERO
        if self.den.is_const() and other.den.is_const():
            return Expression(self.num * other.num)
        return Expression(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        if other.num.is_zero():
            raise ZeroDivisionError("division by a zero expression")
        return Expression(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return other / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise ExpressionError("only integer powers are supported")
        if n >= 0:
            # coprime stays coprime and primitive stays primitive
            return Expression(self.num ** n, self.den ** n, _canonical=True)
        if self.num.is_zero():
            raise ZeroDivisionError("negative power of zero")
        return Expression(self.den ** (-n), self.num ** (-n))

    # queries ---------------------------------------------------------------------
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_const(self) -> bool:
        return self.num.is_const() and self.den.is_const()

    def const_value(self) -> Fraction:
        if not self.is_const():
            raise ExpressionError(f"{self} is not a constant")
        return Fraction(self.num.const_value()) / Fraction(self.den.const_value())

    def is_polynomial(self) -> bool:
        return self.den.is_const()

    def atoms(self) -> set:
        return self.num.atoms() | self.den.atoms()

    def all_atoms(self) -> set:
        """Atoms including those nested inside unary-function arguments."""
        out = set()
        for a in self.atoms():
            out.add(a)
            if a[0] == APP:
                out |= Expression.from_key(a[2]).all_atoms()
        return out

    def as_atom(self) -> Optional[Atom]:
        if not self.den.is_const() or len(self.num.terms) != 1:
            return None
        (m, c), = self.num.terms.items()
        if c != 1 or len(m) != 1 or m[0][1] != 1:
            return None
        return m[0][0]

    def free_of(self, atoms: Iterable[Atom]) -> bool:
        mine = self.all_atoms()
        return not any(a in mine for a in atoms)

    def diff_atom(self, atom: Atom) -> "Expression":
        """Formal partial derivative treating ``atom`` as an independent variable."""
        dn = self.num.diff(atom)
        if self.den.is_const():
            return Expression(dn)
        dd = self.den.diff(atom)
        if dd.is_zero():
            return Expression(dn, self.den)
        g = poly_gcd(self.den, dd)
        if g.is_const():
            return Expression(dn * self.den - self.num * dd, self.den * self.den)
        rest = self.den.exact_div(g)
        return Expression(dn * rest - self.num * dd.exact_div(g), self.den * rest)

    def coefficient_map(self) -> Dict[Monomial, Fraction]:
        if not self.den.is_const():
            raise NotPolynomialError("expression has a nonconstant denominator", self)
        c = Fraction(self.den.const_value())
        return {m: Fraction(v) / c for m, v in self.num.terms.items()}


def _coerce(x) -> Optional[Expression]:
    if isinstance(x, Expression):
        return x
    if isinstance(x, (int, Fraction)):
        return Expression.const(x)
    return None


def _normalize(num: Poly, den: Poly) -> Tuple[Poly, Poly]:
    if den.is_zero():
        raise ZeroDivisionError("zero denominator")
    if num.is_zero():
        return Poly(), Poly.const(1)
    if den.is_const():
        return num.scale(Fraction(1) / Fraction(den.const_value())), Poly.const(1)
    g = mono_gcd(num.monomial_content(), den.monomial_content())
    if g:
        num = num.divide_mono(g)
        den = den.divide_mono(g)
        if den.is_const():
            return num.scale(Fraction(1) / Fraction(den.const_value())), Poly.const(1)
    if len(den.terms) > 1:
        q = num.exact_div(den)
        if q is not None:
            return q, Poly.const(1)
        g = poly_gcd(num, den)
        if not g.is_const():
            num, den = num.exact_div(g), den.exact_div(g)
            if den.is_const():
                return num.scale(Fraction(1) / Fraction(den.const_value())), Poly.const(1)
    _, lc = den.leading()
    c = den.content()
    if lc < 0:
        c = -c
    if c != 1:
        inv = Fraction(1) / c
        num = num.scale(inv)
        den = den.scale(inv)
    return num, den


ZERO = Expression.const(0)
ONE = Expression.const(1)


# ---------------------------------------------------------------------------
# atom helpers

def sym(name: str) -> Expression:
    return Expression.symbol(name)


def atom_name(atom: Atom) -> str:
    return atom[1]


def is_kernel(atom: Atom) -> bool:
    return atom[0] == FN


def kernel_derivative(atom: Atom, var: str) -> Optional[Atom]:
    """Atom for d(atom)/d(var) using the kernel's dependency list, or None."""
    _, name, deps, derivs = atom
    if var not in deps:
        return None
    order = {d: i for i, d in enumerate(deps)}
    return (FN, name, deps, tuple(sorted(derivs + (var,), key=order.__getitem__)))


def unary_derivative(fname: str, arg: Expression) -> Expression:
    f = lambda g: Expression.apply(g, arg)  # noqa: E731
    if fname == "exp":
        return f("exp")
    if fname == "log":
        return ONE / arg
    if fname == "sin":
        return f("cos")
    if fname == "cos":
        return -f("sin")
    if fname == "tan":
        return ONE + f("tan") ** 2
    if fname == "sinh":
        return f("cosh")
    if fname == "cosh":
        return f("sinh")
    if fname == "sqrt":
        return ONE / (2 * f("sqrt"))
    if fname == "atan":
        return ONE / (ONE + arg ** 2)
    raise ExpressionError(f"no derivative rule for {fname}")


AtomRule = Callable[[Atom], Optional[Expression]]


def chain_derivative(e: Expression, rule: AtomRule) -> Expression:
    """Derivation determined by its value on atoms.

    ``rule(atom)`` returns the derivative of a symbol or kernel atom (None for
    zero).  Unary-function atoms are handled here by the chain rule.
    """
    total = ZERO
    for a in e.atoms():
        if a[0] == APP:
            arg = Expression.from_key(a[2])
            inner = chain_derivative(arg, rule)
            da = unary_derivative(a[1], arg) * inner if not inner.is_zero() else None
        else:
            da = rule(a)
        if da is None or da.is_zero():
            continue
        total = total + e.diff_atom(a) * da
    return total


def diff_partial(e: Expression, v, frozen: Iterable[str] = ()) -> Expression:
    """Partial derivative with respect to ``v``.

    ``v`` is a variable name or an atom-valued Expression (a symbol, jet
    coordinate or kernel treated as an independent coordinate).  Kernels whose
    dependency list contains ``v`` become derivative nodes, except kernels
    named in ``frozen``, which behave as independent coordinates.
    """
    frozen = frozenset(frozen)
    if isinstance(v, Expression):
        target = v.as_atom()
        if target is None:
            raise ExpressionError(f"cannot differentiate with respect to {v}")
    else:
        target = (SYM, v)
    tname = target[1] if (target[0] == SYM or (target[0] == FN and not target[3])) else None

    def rule(a: Atom):
        if a == target:
            return ONE
        if a[0] == FN and tname is not None and a[1] not in frozen:
            d = kernel_derivative(a, tname)
            return None if d is None else Expression.from_atom(d)
        return None

    return chain_derivative(e, rule)


def canonicalize(e: Expression) -> Expression:
    """Recompute the normal form; a no-op on expressions built by this module."""
    return Expression(e.num, e.den)


def is_zero(e: Expression) -> bool:
    return e.num.is_zero()


# ---------------------------------------------------------------------------
# substitution

def substitute(e: Expression, bindings: Mapping) -> Expression:
    """Simultaneous substitution of atoms (symbols, jet variables, kernels).

    Keys may be names (symbols) or atom-valued expressions; values are
    expressions.  Unary-function arguments are substituted recursively.
    """
    table: Dict[Atom, Expression] = {}
    for k, v in bindings.items():
        if isinstance(k, str):
            a = (SYM, k)
        else:
            a = k.as_atom() if isinstance(k, Expression) else k
            if a is None:
                raise ExpressionError(f"substitution key {k} is not an atom")
        table[a] = _coerce(v)
    if not table:
        return e
    return substitute_atoms(e, table)


def substitute_atoms(e: Expression, table: Mapping[Atom, Expression]) -> Expression:
    touched = False
    resolved: Dict[Atom, Expression] = {}
    for a in e.atoms():
        if a in table:
            resolved[a] = table[a]
            touched = True
        elif a[0] == APP:
            arg = Expression.from_key(a[2])
            new_arg = substitute_atoms(arg, table)
            if new_arg != arg:
                resolved[a] = Expression.apply(a[1], new_arg)
                touched = True
    if not touched:
        return e
    num = _eval_poly(e.num, resolved)
    if e.den.is_const():
        return num * Expression.const(Fraction(1) / Fraction(e.den.const_value()))
    return num / _eval_poly(e.den, resolved)


def _eval_poly(p: Poly, resolved: Mapping[Atom, Expression]) -> Expression:
    plain: Dict[Monomial, object] = {}
    result = ZERO
    powers: Dict[Tuple[Atom, int], Expression] = {}
    for m, c in p.terms.items():
        keep = []
        factor = None
        for a, k in m:
            r = resolved.get(a)
            if r is None:
                keep.append((a, k))
                continue
            pk = powers.get((a, k))
            if pk is None:
                pk = r ** k
                powers[(a, k)] = pk
            factor = pk if factor is None else factor * pk
        if factor is None:
            plain[m] = c
        else:
            result = result + factor * Expression(Poly({tuple(keep): c}))
    if plain:
        result = result + Expression(Poly(plain))
    return result


# ---------------------------------------------------------------------------
# coefficients

def collect_coefficients(e: Expression, variables: Iterable) -> List[Tuple[Expression, Expression]]:
    """Coefficients of ``e`` viewed as a polynomial in ``variables``.

    Returns ``(monomial, coefficient)`` pairs in canonical order.  Raises
    :class:`NotPolynomialError` if some variable sits in a denominator or
    inside an opaque function argument.
    """
    atoms = set()
    for v in variables:
        if isinstance(v, str):
            atoms.add((SYM, v))
        else:
            a = v.as_atom() if isinstance(v, Expression) else v
            if a is None:
                raise ExpressionError(f"{v} is not a variable")
            atoms.add(a)
    bad = e.den.atoms() & atoms
    if bad:
        raise NotPolynomialError(
            f"{to_string(Expression.from_atom(sorted(bad)[0]))} occurs in a denominator", e
        )
    for a in e.atoms():
        if a[0] == APP and a not in atoms:
            inner = Expression.from_key(a[2]).all_atoms()
            if inner & atoms:
                raise NotPolynomialError(
                    f"non-polynomial dependence through {to_string(Expression.from_atom(a))}",
                    Expression.from_atom(a),
                )
    out = []
    for mono, coeff in e.num.coefficients_in(atoms).items():
        if coeff.is_zero():
            continue
        out.append((Expression(Poly({mono: 1})), Expression(coeff, e.den)))
    out.sort(key=lambda mc: _mono_order(next(iter(mc[0].num.terms))))
    return out


def _mono_order(m: Monomial):
    return (mono_degree(m), lex_key(m))


# ---------------------------------------------------------------------------
# printing

def _fmt_rational(c: Fraction) -> str:
    c = Fraction(c)
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def atom_to_string(a: Atom) -> str:
    kind = a[0]
    if kind == SYM:
        return a[1]
    if kind == FN:
        _, name, deps, derivs = a
        if not derivs:
            return name
        parts = [name]
        i = 0
        while i < len(derivs):
            j = i
            while j < len(derivs) and derivs[j] == derivs[i]:
                j += 1
            parts.append(derivs[i])
            if j - i > 1:
                parts.append(str(j - i))
            i = j
        return "df(" + ",".join(parts) + ")"
    return f"{a[1]}({to_string(Expression.from_key(a[2]))})"


def _mono_to_string(m: Monomial) -> str:
    parts = []
    for a, e in m:
        s = atom_to_string(a)
        parts.append(s if e == 1 else f"{s}^{e}")
    return "*".join(parts)


def poly_to_string(p: Poly) -> str:
    if p.is_zero():
        return "0"
    items = sorted(p.terms.items(), key=lambda mc: (-mono_degree(mc[0]), lex_key(mc[0])))
    out = []
    for k, (m, c) in enumerate(items):
        c = Fraction(c)
        neg = c < 0
        a = -c if neg else c
        body = _mono_to_string(m)
        if not body:
            text = _fmt_rational(a)
        else:
            text = body if a.numerator == 1 else f"{a.numerator}*{body}"
            if a.denominator != 1:
                text += f"/{a.denominator}"
        if k == 0:
            out.append(("-" if neg else "") + text)
        else:
            out.append((" - " if neg else " + ") + text)
    return "".join(out)


def to_string(e: Expression) -> str:
    n = poly_to_string(e.num)
    if e.den.is_const():
        return n
    d = poly_to_string(e.den)
    if len(e.num.terms) > 1:
        n = f"({n})"
    if len(e.den.terms) > 1 or any(len(m) > 1 or (m and m[0][1] > 1) for m in e.den.terms) or any(
        Fraction(c) != 1 for c in e.den.terms.values()
    ):
        d = f"({d})"
    return f"{n}/{d}"
