"""Sparse multivariate polynomials over the rationals.

Variables ("atoms") are plain tuples whose first entry is an integer kind tag,
so they are hashable and totally ordered without any extra machinery:

    (SYM, name)                      symbol or jet coordinate
    (FN, name, deps, derivs)         opaque function kernel / derivative node
    (APP, fname, argkey)             opaque unary applied to an expression

A monomial is a tuple of ``(atom, exponent)`` pairs sorted by atom.  A
polynomial maps monomials to nonzero ``int``/``Fraction`` coefficients.
"""

from __future__ import annotations

from contextvars import ContextVar
from contextlib import contextmanager
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

SYM, FN, APP = 0, 1, 2

Atom = tuple
Monomial = Tuple[Tuple[Atom, int], ...]

ONE_MONO: Monomial = ()
EPSILON = (SYM, "epsilon")

# (atom, max exponent kept); monomials exceeding it are dropped on multiplication
_nilpotent: ContextVar[Optional[Tuple[Atom, int]]] = ContextVar("nilpotent", default=None)

# sentinel that sorts after every real atom, used for lex keys
_TAIL = (((99,), 0),)


@contextmanager
def truncate_epsilon(order: int):
    """Within the block, ``epsilon**(order+1)`` and higher powers vanish."""
    token = _nilpotent.set((EPSILON, order))
    try:
        yield
    finally:
        _nilpotent.reset(token)


def epsilon_order() -> Optional[int]:
    rule = _nilpotent.get()
    return None if rule is None else rule[1]


def _norm(c):
    if type(c) is Fraction and c.denominator == 1:
        return c.numerator
    return c


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    out = []
    i = j = 0
    la, lb = len(a), len(b)
    while i < la and j < lb:
        va, ea = a[i]
        vb, eb = b[j]
        if va == vb:
            out.append((va, ea + eb))
            i += 1
            j += 1
        elif va < vb:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def mono_div(a: Monomial, b: Monomial) -> Optional[Monomial]:
    """a / b if b divides a, else None."""
    da = dict(a)
    for v, e in b:
        have = da.get(v, 0)
        if have < e:
            return None
        if have == e:
            del da[v]
        else:
            da[v] = have - e
    return tuple(sorted(da.items()))


def mono_gcd(a: Monomial, b: Monomial) -> Monomial:
    db = dict(b)
    return tuple((v, min(e, db[v])) for v, e in a if v in db)


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def lex_key(m: Monomial):
    """Sort key such that ``min`` picks the lex-leading monomial."""
    return tuple((v, -e) for v, e in m) + _TAIL


def _too_high(m: Monomial, rule) -> bool:
    atom, limit = rule
    for v, e in m:
        if v == atom:
            return e > limit
    return False


class Poly:
    """Immutable-by-convention sparse polynomial."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Optional[Dict[Monomial, object]] = None):
        self.terms = terms if terms is not None else {}
        self._hash = None

    # construction -------------------------------------------------------
    @staticmethod
    def const(c) -> "Poly":
        c = _norm(Fraction(c)) if not isinstance(c, int) else c
        return Poly({ONE_MONO: c} if c != 0 else {})

    @staticmethod
    def atom(a: Atom, exp: int = 1) -> "Poly":
        return Poly({((a, exp),): 1})

    # queries --------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and ONE_MONO in self.terms)

    def const_value(self):
        return self.terms.get(ONE_MONO, 0)

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def atoms(self) -> set:
        out = set()
        for m in self.terms:
            for v, _ in m:
                out.add(v)
        return out

    def degree_in(self, atom: Atom) -> int:
        best = 0
        for m in self.terms:
            for v, e in m:
                if v == atom and e > best:
                    best = e
        return best

    def total_degree(self) -> int:
        return max((mono_degree(m) for m in self.terms), default=0)

    def leading(self) -> Tuple[Monomial, object]:
        m = min(self.terms, key=lex_key)
        return m, self.terms[m]

    def key(self):
        return tuple(sorted(self.terms.items()))

    def __eq__(self, other):
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __repr__(self):
        return f"Poly({self.terms!r})"

    # arithmetic -------------------------------------------------------------
    def __add__(self, other: "Poly") -> "Poly":
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Poly(out)

    def __neg__(self) -> "Poly":
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        if not other.terms:
            return self
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, 0) - c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Poly(out)

    def scale(self, c) -> "Poly":
        if c == 0:
            return Poly()
        if c == 1:
            return self
        return Poly({m: _norm(v * c) for m, v in self.terms.items()})

    def mul_mono(self, mono: Monomial, c=1) -> "Poly":
        rule = _nilpotent.get()
        out = {}
        for m, v in self.terms.items():
            nm = mono_mul(m, mono)
            if rule is not None and _too_high(nm, rule):
                continue
            out[nm] = _norm(v * c)
        return Poly(out)

    def __mul__(self, other: "Poly") -> "Poly":
        if not self.terms or not other.terms:
            return Poly()
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        if len(b) == 1:
            (m, c), = b.items()
            return self.mul_mono(m, c) if a is self.terms else other.mul_mono(m, c)
        rule = _nilpotent.get()
        out: Dict[Monomial, object] = {}
        for mb, cb in b.items():
            for ma, ca in a.items():
                nm = mono_mul(ma, mb)
                if rule is not None and _too_high(nm, rule):
                    continue
                s = out.get(nm, 0) + ca * cb
                if s:
                    out[nm] = s
                else:
                    out.pop(nm, None)
        return Poly({m: _norm(c) for m, c in out.items()})

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = Poly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def truncated(self) -> "Poly":
        rule = _nilpotent.get()
        if rule is None:
            return self
        return Poly({m: c for m, c in self.terms.items() if not _too_high(m, rule)})

    # calculus -------------------------------------------------------------
    def diff(self, atom: Atom) -> "Poly":
        out = {}
        for m, c in self.terms.items():
            for k, (v, e) in enumerate(m):
                if v == atom:
                    if e == 1:
                        nm = m[:k] + m[k + 1:]
                    else:
                        nm = m[:k] + ((v, e - 1),) + m[k + 1:]
                    s = out.get(nm, 0) + c * e
                    if s:
                        out[nm] = s
                    else:
                        out.pop(nm, None)
                    break
        return Poly(out)

    # structure ---------------------------------------------------------------
    def content(self) -> Fraction:
        """Positive rational c with self/c primitive with integer coefficients."""
        from math import gcd

        num = 0
        den = 1
        for c in self.terms.values():
            c = Fraction(c)
            num = gcd(num, c.numerator)
            den = den * c.denominator // gcd(den, c.denominator)
        if num == 0:
            return Fraction(1)
        return Fraction(num, den)

    def monomial_content(self) -> Monomial:
        it = iter(self.terms)
        g = next(it, ONE_MONO)
        for m in it:
            if not g:
                break
            g = mono_gcd(g, m)
        return g

    def divide_mono(self, mono: Monomial) -> "Poly":
        return Poly({mono_div(m, mono): c for m, c in self.terms.items()})

    def coefficients_in(self, atoms: Iterable[Atom]) -> Dict[Monomial, "Poly"]:
        """Split into {monomial in ``atoms``: coefficient polynomial}."""
        sel = set(atoms)
        out: Dict[Monomial, Dict[Monomial, object]] = {}
        for m, c in self.terms.items():
            inside = tuple(p for p in m if p[0] in sel)
            outside = tuple(p for p in m if p[0] not in sel)
            bucket = out.setdefault(inside, {})
            bucket[outside] = bucket.get(outside, 0) + c
        return {k: Poly({m: c for m, c in v.items() if c}) for k, v in out.items()}

    def exact_div(self, other: "Poly") -> Optional["Poly"]:
        """self / other when the division is exact, else None."""
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        if self.is_zero():
            return Poly()
        if len(other.terms) == 1:
            (m, c), = other.terms.items()
            out = {}
            for mm, cc in self.terms.items():
                q = mono_div(mm, m)
                if q is None:
                    return None
                out[q] = _norm(Fraction(cc) / c)
            return Poly(out)
        lm, lc = other.leading()
        rem = self
        quot: Dict[Monomial, object] = {}
        with _no_truncation():
            while rem.terms:
                rm, rc = rem.leading()
                q = mono_div(rm, lm)
                if q is None:
                    return None
                qc = _norm(Fraction(rc) / lc)
                quot[q] = qc
                rem = rem - other.mul_mono(q, qc)
        return Poly(quot)

    def iter_terms(self) -> Iterator[Tuple[Monomial, object]]:
        return iter(self.terms.items())


@contextmanager
def _no_truncation():
    token = _nilpotent.set(None)
    try:
        yield
    finally:
        _nilpotent.reset(token)


no_truncation = _no_truncation


# ---------------------------------------------------------------------------
# multivariate gcd (recursive primitive remainder sequences)

def _univariate(p: Poly, v: Atom) -> Dict[int, Poly]:
    out: Dict[int, Dict[Monomial, object]] = {}
    for m, c in p.terms.items():
        k = 0
        rest = []
        for a, e in m:
            if a == v:
                k = e
            else:
                rest.append((a, e))
        bucket = out.setdefault(k, {})
        bucket[tuple(rest)] = c
    return {k: Poly(t) for k, t in out.items()}


def _from_univariate(coeffs: Dict[int, Poly], v: Atom) -> Poly:
    total = Poly()
    for k, c in coeffs.items():
        total = total + (c if k == 0 else c * Poly.atom(v, k))
    return total


def _normalized(p: Poly) -> Poly:
    """Primitive integer form with positive leading coefficient."""
    if p.is_zero():
        return p
    c = p.content()
    if p.leading()[1] < 0:
        c = -c
    return p.scale(Fraction(1) / c)


def _gcd_list(polys) -> Poly:
    g = Poly()
    for q in polys:
        g = poly_gcd(g, q)
        if g.is_const():
            return Poly.const(1)
    return g


def _prem(a: Poly, b: Poly, v: Atom) -> Poly:
    """lc(b)^(deg a - deg b + 1) * a reduced modulo b."""
    db = b.degree_in(v)
    lb = _univariate(b, v)[db]
    r = a
    steps = a.degree_in(v) - db + 1
    while not r.is_zero():
        dr = r.degree_in(v)
        if dr < db:
            break
        lr = _univariate(r, v)[dr]
        shift = Poly.atom(v, dr - db) if dr > db else Poly.const(1)
        r = lb * r - lr * shift * b
        steps -= 1
    if steps > 0 and not r.is_zero():
        r = r * lb ** steps
    return r


def _primitive_in(p: Poly, v: Atom) -> Poly:
    content = _gcd_list(_univariate(p, v).values())
    if content.is_const():
        return _normalized(p)
    q = p.exact_div(content)
    return _normalized(q)


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Greatest common divisor, primitive with positive leading coefficient."""
    with _no_truncation():
        return _gcd(a, b)


def _gcd(a: Poly, b: Poly) -> Poly:
    if a.is_zero():
        return _normalized(b)
    if b.is_zero():
        return _normalized(a)
    if a.is_const() or b.is_const():
        return Poly.const(1)
    g = mono_gcd(a.monomial_content(), b.monomial_content())
    if g:
        a, b = a.divide_mono(g), b.divide_mono(g)
    gp = Poly({g: 1})
    common = a.atoms() & b.atoms()
    if not common:
        return gp
    live = [w for w in sorted(common, key=repr) if _degree_bound(a, b, w) > 0]
    if not live:
        return gp
    v = min(live, key=lambda w: (max(a.degree_in(w), b.degree_in(w)), repr(w)))
    ua, ub = _univariate(a, v), _univariate(b, v)
    ca, cb = _gcd_list(ua.values()), _gcd_list(ub.values())
    c = _gcd(ca, cb)
    pa = a if ca.is_const() else a.exact_div(ca)
    pb = b if cb.is_const() else b.exact_div(cb)
    h = _subresultant_gcd(pa, pb, v)
    return _normalized(c * h * gp)


def _subresultant_gcd(a: Poly, b: Poly, v: Atom) -> Poly:
    """gcd of two polynomials primitive in v, by the subresultant remainder sequence."""
    if a.degree_in(v) < b.degree_in(v):
        a, b = b, a
    g = h = Poly.const(1)
    while True:
        d = a.degree_in(v) - b.degree_in(v)
        r = _prem(a, b, v)
        if r.is_zero():
            return _primitive_in(b, v)
        if r.degree_in(v) == 0:
            return Poly.const(1)
        a = b
        b = r.exact_div(g * h ** d)
        g = _univariate(a, v)[a.degree_in(v)]
        if d == 0:
            pass
        elif d == 1:
            h = g
        else:
            h = (g ** d).exact_div(h ** (d - 1))


# modular degree bounds: the image of the true gcd divides the gcd of the images,
# so a trivial image gcd (with nonvanishing leading coefficients) proves degree 0

_PRIME = (1 << 61) - 1


def _mod(c) -> Optional[int]:
    c = Fraction(c)
    d = c.denominator % _PRIME
    if d == 0:
        return None
    return c.numerator * pow(d, _PRIME - 2, _PRIME) % _PRIME


def _image(p: Poly, v: Atom, point: Dict[Atom, int]) -> Optional[List[int]]:
    deg = p.degree_in(v)
    out = [0] * (deg + 1)
    for m, c in p.terms.items():
        val = _mod(c)
        if val is None:
            return None
        k = 0
        for a, e in m:
            if a == v:
                k = e
            else:
                val = val * pow(point[a], e, _PRIME) % _PRIME
        out[k] = (out[k] + val) % _PRIME
    if out[-1] == 0:
        return None
    return out


def _uni_gcd_degree(a: List[int], b: List[int]) -> int:
    def trim(x):
        while x and x[-1] == 0:
            x.pop()
        return x

    a, b = trim(list(a)), trim(list(b))
    while b:
        inv = pow(b[-1], _PRIME - 2, _PRIME)
        while len(a) >= len(b):
            f = a[-1] * inv % _PRIME
            s = len(a) - len(b)
            for i, c in enumerate(b):
                a[s + i] = (a[s + i] - f * c) % _PRIME
            trim(a)
            if not a:
                break
        a, b = b, a
    return len(a) - 1


def _degree_bound(a: Poly, b: Poly, v: Atom) -> int:
    others = sorted((a.atoms() | b.atoms()) - {v}, key=repr)
    best = min(a.degree_in(v), b.degree_in(v))
    for trial in range(3):
        point = {w: (7919 * (i + 1) + 104729 * trial + 12345) % _PRIME for i, w in enumerate(others)}
        ia, ib = _image(a, v, point), _image(b, v, point)
        if ia is None or ib is None:
            continue
        return min(best, _uni_gcd_degree(ia, ib))
    return best
