"""Problem files, jet spaces and total derivatives.

A problem file is a sequence of ``key = value`` lines.  List values are comma
separated (optionally wrapped in braces), ``#`` starts a comment and a
trailing backslash or an unbalanced parenthesis continues a line.  Two
directives are recognised besides the keys::

    depend f = t, x        # f is a function of t and x
    assume gamma = 5/3     # pin a free parameter
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations_with_replacement
from math import comb
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from .expr import (
    ONE,
    ZERO,
    Expression,
    ExpressionError,
    chain_derivative,
    kernel_derivative,
)
from .parser import RESERVED, SymbolTable, parse, split_top_level
from .poly import FN, SYM, Atom


class ProblemError(ValueError):
    """Invalid or inconsistent problem description."""


INT_KEYS = (
    "jetorder",
    "nonclassical",
    "contact",
    "variational",
    "approxorder",
    "arborder",
    "zorder",
    "generalequiv",
    "phiorder",
)
LIST_KEYS = ("xvar", "uvar", "qcond", "arbelem", "freepars", "nonzeropars", "nonpolyders", "leadders")
EXPR_KEYS = ("diffeqs", "lagrangian")
KNOWN_KEYS = frozenset(INT_KEYS + LIST_KEYS + EXPR_KEYS)

_IDENT = re.compile(r"^[A-Za-z][A-Za-z0-9]*$")


@dataclass(frozen=True, order=True)
class JetVariable:
    """Derivative of dependent variable ``dep`` along the sorted ``index``.

    ``index`` holds positions into ``xvar``; ``k`` is the perturbation order
    of an expanded variable (approximate mode) or ``None``.
    """

    dep: int
    index: Tuple[int, ...] = ()
    k: Optional[int] = None

    @property
    def order(self) -> int:
        return len(self.index)

    def extended(self, i: int) -> "JetVariable":
        return JetVariable(self.dep, tuple(sorted(self.index + (i,))), self.k)


@dataclass(frozen=True)
class Problem:
    jetorder: int
    xvar: Tuple[str, ...]
    uvar: Tuple[str, ...]
    diffeqs: Tuple[Expression, ...] = ()
    leadders: Tuple[Atom, ...] = ()
    nonclassical: int = 0
    qcond: Tuple[int, ...] = ()
    contact: int = 0
    variational: int = 0
    lagrangian: Optional[Expression] = None
    approxorder: int = 0
    arbelem: Tuple[str, ...] = ()
    arborder: int = -1
    zorder: int = 0
    generalequiv: int = 0
    nonpolyders: Tuple[str, ...] = ()
    freepars: Tuple[str, ...] = ()
    nonzeropars: Tuple[Expression, ...] = ()
    phiorder: Optional[int] = None
    functions: Mapping[str, Tuple[str, ...]] = field(default_factory=dict)
    assumptions: Mapping[str, Fraction] = field(default_factory=dict)
    warnings: Tuple[str, ...] = ()

    # ------------------------------------------------------------------ modes
    @property
    def n(self) -> int:
        return len(self.xvar)

    @property
    def m(self) -> int:
        return len(self.uvar)

    @property
    def mode(self) -> str:
        if self.variational:
            return "variational"
        if self.contact:
            return "contact"
        if self.arbelem:
            return "equivalence"
        if self.nonclassical:
            return "conditional"
        return "point"

    @property
    def approximate(self) -> bool:
        return self.approxorder > 0

    @property
    def effective_phiorder(self) -> int:
        return self.jetorder - 1 if self.phiorder is None else self.phiorder

    # ------------------------------------------------------------- jet names
    def jet_name(self, v: JetVariable) -> str:
        base = self.uvar[v.dep] + ("" if v.k is None else str(v.k))
        if not v.index:
            return base
        return base + "_" + "".join(self.xvar[i] for i in v.index)

    def jet_symbol(self, v: JetVariable) -> Expression:
        return Expression.symbol(self.jet_name(v))

    @cached_property
    def _dep_bases(self) -> Dict[str, Tuple[int, Optional[int]]]:
        out: Dict[str, Tuple[int, Optional[int]]] = {}
        for a, u in enumerate(self.uvar):
            out[u] = (a, None)
            for k in range(self.approxorder + 1 if self.approximate else 0):
                out[f"{u}{k}"] = (a, k)
        return out

    @cached_property
    def _jet_cache(self) -> Dict[str, Optional[JetVariable]]:
        return {}

    def jet_info(self, name: str) -> Optional[JetVariable]:
        """Parse a (possibly non-canonical) derivative token such as ``u_xt``."""
        cache = self._jet_cache
        if name in cache:
            return cache[name]
        result = None
        base, sep, suffix = name.partition("_")
        hit = self._dep_bases.get(base)
        if hit is not None:
            dep, k = hit
            if not sep:
                result = JetVariable(dep, (), k)
            elif suffix:
                idx = self._split_index(suffix)
                if idx is not None:
                    result = JetVariable(dep, tuple(sorted(idx)), k)
        cache[name] = result
        return result

    def _split_index(self, suffix: str) -> Optional[List[int]]:
        out = []
        pos = 0
        while pos < len(suffix):
            for i, x in enumerate(self.xvar):
                if suffix.startswith(x, pos):
                    out.append(i)
                    pos += len(x)
                    break
            else:
                return None
        return out

    def canonical_jet_name(self, name: str) -> Optional[str]:
        info = self.jet_info(name)
        return None if info is None else self.jet_name(info)

    def is_jet_symbol(self, name: str) -> bool:
        return self.jet_info(name) is not None

    def jet_order_of(self, name: str) -> int:
        info = self.jet_info(name)
        return -1 if info is None else info.order

    # ------------------------------------------------------------ arbitrary elements
    @cached_property
    def zvars(self) -> Tuple[str, ...]:
        """Argument space of the arbitrary elements: x, u and u-derivatives up to zorder."""
        if not self.arbelem:
            return ()
        out = list(self.xvar)
        out += [self.jet_name(v) for v in build_jet(self, maxorder=self.zorder)]
        return tuple(out)

    def arbelem_kernel(self, name: str, derivs: Sequence[str] = ()) -> Expression:
        return Expression.kernel(name, self.zvars, derivs)

    def _arbelem_token(self, name: str) -> Optional[Expression]:
        for p in self.arbelem:
            if name.startswith(p + "_"):
                rest = name[len(p) + 1:]
                derivs = self._split_z(rest)
                if derivs is not None:
                    return self.arbelem_kernel(p, derivs)
        return None

    def _split_z(self, rest: str) -> Optional[List[str]]:
        # longest match first: f_u_t is df(f, u_t), not df(f, u, t)
        names = sorted(self.zvars, key=len, reverse=True)
        out = []
        pos = 0
        while pos < len(rest):
            for z in names:
                end = pos + len(z)
                if rest.startswith(z, pos) and (end == len(rest) or rest[end] == "_"):
                    out.append(z)
                    pos = end + 1 if end < len(rest) else end
                    break
            else:
                return None
        return out

    # --------------------------------------------------------------- unknowns
    @cached_property
    def unknowns(self) -> Dict[str, Tuple[str, ...]]:
        """Unknown infinitesimal kernels and their dependency lists, in component order."""
        xs, us = self.xvar, self.uvar
        point_deps = xs + us
        out: Dict[str, Tuple[str, ...]] = {}
        mode = self.mode
        if self.approximate:
            deps0 = xs + tuple(f"{u}0" for u in us)
            for k in range(self.approxorder + 1):
                for j, x in enumerate(xs):
                    if mode == "conditional" and j < self.nonclassical:
                        continue
                    out[f"xi{k}_{x}"] = deps0
                for u in us:
                    out[f"eta{k}_{u}"] = deps0
            return out
        if mode == "contact":
            out["omega"] = xs + us + tuple(f"{us[0]}_{x}" for x in xs)
            return out
        if mode == "equivalence":
            base = point_deps + (self.arbelem if self.generalequiv else ())
            for x in xs:
                out[f"xi_{x}"] = base
            for u in us:
                out[f"eta_{u}"] = base
            for pname in self.arbelem:
                out[f"mu_{pname}"] = point_deps + self.arbelem
            return out
        for j, x in enumerate(xs):
            if mode == "conditional" and j < self.nonclassical:
                continue
            out[f"xi_{x}"] = point_deps
        for u in us:
            out[f"eta_{u}"] = point_deps
        if mode == "variational":
            phi_deps = point_deps + tuple(
                self.jet_name(v) for v in build_jet(self, maxorder=self.effective_phiorder) if v.order > 0
            )
            for x in xs:
                out[f"phi_{x}"] = phi_deps
        return out

    def unknown_kernel(self, name: str) -> Expression:
        return Expression.kernel(name, self.unknowns[name])

    # ------------------------------------------------------------ symbol table
    @cached_property
    def symbols(self) -> SymbolTable:
        funcs: Dict[str, Tuple[str, ...]] = dict(self.functions)
        funcs.update(self.unknowns)
        for pname in self.arbelem:
            funcs[pname] = self.zvars
        constants = {f for f in self.freepars if f not in funcs}
        coords = set(self.xvar)
        return SymbolTable(
            coordinates=frozenset(coords),
            constants=frozenset(constants),
            functions=funcs,
            resolver=self._resolve,
        )

    def _resolve(self, name: str) -> Optional[Expression]:
        canon = self.canonical_jet_name(name)
        if canon is not None:
            return Expression.symbol(canon)
        if self.arbelem:
            return self._arbelem_token(name)
        return None

    def parse(self, text: str, extra_functions: Optional[Mapping[str, Tuple[str, ...]]] = None) -> Expression:
        table = self.symbols
        if extra_functions:
            table = table.with_functions(extra_functions)
        return parse(text, table)

    # ------------------------------------------------------- kernel dependencies
    def dep_value(self, name: str) -> Expression:
        """The expression a kernel dependency name stands for."""
        if name in self.arbelem:
            return self.arbelem_kernel(name)
        return Expression.symbol(name)

    def derivation(self, sym_rule: Callable[[str], Optional[Expression]]) -> Callable[[Expression], Expression]:
        """Derivation fixed by its action on symbols, extended to kernels via their dependencies."""
        cache: Dict[Atom, Optional[Expression]] = {}
        arb = set(self.arbelem)

        def rule(a: Atom) -> Optional[Expression]:
            if a in cache:
                return cache[a]
            if a[0] == SYM:
                r = sym_rule(a[1])
            else:
                r = ZERO
                for d in a[2]:
                    if d in arb:
                        inner = rule((FN, d, self.zvars, ()))
                    else:
                        inner = sym_rule(d)
                    if inner is None or inner.is_zero():
                        continue
                    r = r + Expression.from_atom(kernel_derivative(a, d)) * inner
                if r.is_zero():
                    r = None
            cache[a] = r
            return r

        return lambda e: chain_derivative(e, rule)

    def total_derivative_op(self, i: int) -> Callable[[Expression], Expression]:
        x = self.xvar[i]

        def sym_rule(name: str) -> Optional[Expression]:
            if name == x:
                return ONE
            info = self.jet_info(name)
            if info is None:
                return None
            return self.jet_symbol(info.extended(i))

        return self.derivation(sym_rule)

    @cached_property
    def _total_ops(self):
        return [self.total_derivative_op(i) for i in range(self.n)]

    def D(self, e: Expression, i: int) -> Expression:
        """Total derivative without order checking (jet grows as needed)."""
        return self._total_ops[i](e)

    def equiv_derivative_op(self, beta: int) -> Callable[[Expression], Expression]:
        z = self.zvars[beta]
        return self.derivation(lambda name: ONE if name == z else None)


# ---------------------------------------------------------------------------
# jet space

def build_jet(p: Problem, maxorder: Optional[int] = None, k: Optional[int] = None) -> List[JetVariable]:
    """Jet variables of order 0..maxorder ordered by (order, dependent, multi-index)."""
    r = p.jetorder if maxorder is None else maxorder
    out = []
    for order in range(r + 1):
        for a in range(p.m):
            for idx in combinations_with_replacement(range(p.n), order):
                out.append(JetVariable(a, idx, k))
    return out


def jet_count(n: int, m: int, k: int) -> int:
    return m * comb(n + k - 1, k)


def jet_space_coordinates(p: Problem) -> List[str]:
    return list(p.xvar) + [p.jet_name(v) for v in build_jet(p)]


def _max_jet_order(p: Problem, e: Expression) -> int:
    best = -1
    for a in e.all_atoms():
        if a[0] == SYM:
            best = max(best, p.jet_order_of(a[1]))
        elif a[0] == FN:
            for d in a[2]:
                best = max(best, p.jet_order_of(d))
    return best


def total_derivative(e: Expression, i: int, p: Problem) -> Expression:
    """D/Dx_i of ``e``; the result must stay inside the declared jet."""
    if not 0 <= i < p.n:
        raise ProblemError(f"independent-variable index {i} out of range")
    if _max_jet_order(p, e) >= p.jetorder:
        raise ProblemError(
            f"total derivative would leave the jet space of order {p.jetorder}"
        )
    return p.D(e, i)


def total_derivative_equiv(e: Expression, beta: int, p: Problem) -> Expression:
    """Derivative along the arbitrary-element argument z_beta (0-based)."""
    if not p.arbelem:
        raise ProblemError("no arbitrary elements declared")
    if not 0 <= beta < len(p.zvars):
        raise ProblemError(f"argument index {beta} out of range 0..{len(p.zvars) - 1}")
    return p.equiv_derivative_op(beta)(e)


# ---------------------------------------------------------------------------
# loading

def _strip_braces(v: str) -> str:
    v = v.strip()
    if v.startswith("{") and v.endswith("}"):
        v = v[1:-1]
    return v.strip()


def _logical_lines(text: str) -> List[Tuple[int, str]]:
    out: List[Tuple[int, str]] = []
    buf = ""
    start = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not buf:
            start = lineno
        cont = line.endswith("\\")
        if cont:
            line = line[:-1]
        buf = f"{buf} {line}" if buf else line
        depth = buf.count("(") - buf.count(")") + buf.count("{") - buf.count("}")
        if cont or depth > 0:
            continue
        if buf.strip():
            out.append((start, buf.strip()))
        buf = ""
    if buf.strip():
        out.append((start, buf.strip()))
    return out


def _parse_int(key: str, value: str, lineno: int) -> int:
    try:
        return int(value.strip())
    except ValueError:
        raise ProblemError(f"line {lineno}: {key} must be an integer, got {value!r}") from None


def _parse_list(value: str) -> List[str]:
    return split_top_level(_strip_braces(value))


def load_problem(text: str) -> Problem:
    raw: Dict[str, Tuple[int, str]] = {}
    functions: Dict[str, Tuple[str, ...]] = {}
    assumptions: Dict[str, Fraction] = {}
    for lineno, line in _logical_lines(text):
        words = line.split(None, 1)
        if words[0] in ("depend", "assume") and len(words) == 2:
            body = words[1]
            if words[0] == "depend":
                if "=" in body:
                    name, deps = body.split("=", 1)
                    deplist = _parse_list(deps)
                else:
                    name, *deplist = [s.strip() for s in body.split(",")]
                name = name.strip()
                if not _IDENT.match(name.replace("_", "a")):
                    raise ProblemError(f"line {lineno}: bad function name {name!r}")
                functions[name] = tuple(d.strip() for d in deplist)
            else:
                if "=" not in body:
                    raise ProblemError(f"line {lineno}: expected 'assume name = value'")
                name, val = body.split("=", 1)
                try:
                    assumptions[name.strip()] = Fraction(val.strip())
                except ValueError:
                    raise ProblemError(f"line {lineno}: assumed value must be rational") from None
            continue
        if "=" not in line:
            raise ProblemError(f"line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        key = key.strip().rstrip(":")
        if key not in KNOWN_KEYS:
            raise ProblemError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ProblemError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = (lineno, value)

    for key in ("jetorder", "xvar", "uvar"):
        if key not in raw:
            raise ProblemError(f"mandatory key {key!r} is missing")

    ints = {k: _parse_int(k, raw[k][1], raw[k][0]) for k in INT_KEYS if k in raw}
    xvar = tuple(_parse_list(raw["xvar"][1]))
    uvar = tuple(_parse_list(raw["uvar"][1]))
    lists = {k: tuple(_parse_list(raw[k][1])) for k in LIST_KEYS if k in raw}

    qcond = tuple(_parse_int("qcond", q, raw["qcond"][0]) for q in lists.get("qcond", ()))
    warnings: List[str] = []

    base = Problem(
        jetorder=ints["jetorder"],
        xvar=xvar,
        uvar=uvar,
        nonclassical=ints.get("nonclassical", 0),
        qcond=qcond,
        contact=ints.get("contact", 0),
        variational=ints.get("variational", 0),
        approxorder=ints.get("approxorder", 0),
        arbelem=lists.get("arbelem", ()),
        arborder=ints.get("arborder", -1),
        zorder=ints.get("zorder", 0),
        generalequiv=ints.get("generalequiv", 0),
        freepars=lists.get("freepars", ()),
        phiorder=ints.get("phiorder"),
        functions=functions,
        assumptions=assumptions,
    )
    _validate_structure(base)

    def parse_expr(text: str, key: str) -> Expression:
        try:
            return base.parse(text)
        except ExpressionError as exc:
            raise ProblemError(f"line {raw[key][0]}: {key}: {exc}") from None

    diffeqs = tuple(parse_expr(t, "diffeqs") for t in _parse_list(raw["diffeqs"][1])) if "diffeqs" in raw else ()
    leadders: List[Atom] = []
    for tok in lists.get("leadders", ()):
        e = parse_expr(tok, "leadders")
        a = e.as_atom()
        if a is None or not (
            (a[0] == SYM and base.is_jet_symbol(a[1])) or (a[0] == FN and a[1] in base.arbelem and a[3])
        ):
            raise ProblemError(f"leading derivative {tok!r} is not a derivative of the problem")
        leadders.append(a)
    lagrangian = None
    if "lagrangian" in raw:
        items = _parse_list(raw["lagrangian"][1])
        if len(items) != 1:
            raise ProblemError("the lagrangian list must contain exactly one element")
        lagrangian = parse_expr(items[0], "lagrangian")
    nonpolyders = []
    for tok in lists.get("nonpolyders", ()):
        canon = base.canonical_jet_name(tok)
        if canon is None:
            raise ProblemError(f"nonpolyders entry {tok!r} is not a jet variable")
        nonpolyders.append(canon)
    nonzero = tuple(parse_expr(t, "nonzeropars") for t in lists.get("nonzeropars", ()))

    if base.variational:
        if lagrangian is None:
            raise ProblemError("variational mode needs a lagrangian")
    else:
        if not diffeqs and not leadders:
            warnings += [
                "The list 'diffeqs' of differential equation(s) is missing!",
                "The list 'leadders' of leading derivative(s) is missing!",
                "Only prolongation and standard-algebra commands are available.",
            ]
        elif not leadders:
            raise ProblemError("The list 'leadders' of leading derivative(s) is missing!")
        elif not diffeqs:
            raise ProblemError("The list 'diffeqs' of differential equation(s) is missing!")
        elif len(diffeqs) != len(leadders):
            raise ProblemError(
                f"'diffeqs' has {len(diffeqs)} entries but 'leadders' has {len(leadders)}"
            )
    for e in diffeqs + ((lagrangian,) if lagrangian is not None else ()):
        if _max_jet_order(base, e) > base.jetorder:
            raise ProblemError(f"{e} involves derivatives beyond jetorder={base.jetorder}")

    return Problem(
        jetorder=base.jetorder,
        xvar=xvar,
        uvar=uvar,
        diffeqs=diffeqs,
        leadders=tuple(leadders),
        nonclassical=base.nonclassical,
        qcond=qcond,
        contact=base.contact,
        variational=base.variational,
        lagrangian=lagrangian,
        approxorder=base.approxorder,
        arbelem=base.arbelem,
        arborder=base.arborder,
        zorder=base.zorder,
        generalequiv=base.generalequiv,
        nonpolyders=tuple(nonpolyders),
        freepars=base.freepars,
        nonzeropars=nonzero,
        phiorder=base.phiorder,
        functions=functions,
        assumptions=assumptions,
        warnings=tuple(warnings),
    )


def load_problem_file(path: str) -> Problem:
    with open(path, encoding="utf-8") as fh:
        return load_problem(fh.read())


def _validate_structure(p: Problem) -> None:
    if p.jetorder < 1:
        raise ProblemError("jetorder must be a positive integer")
    if not p.xvar or not p.uvar:
        raise ProblemError("xvar and uvar must be nonempty")
    names = list(p.xvar) + list(p.uvar) + list(p.arbelem)
    for name in names:
        if not _IDENT.match(name):
            raise ProblemError(f"identifier {name!r} must be alphanumeric without underscores")
        if name in RESERVED:
            raise ProblemError(f"identifier {name!r} is reserved")
    if len(set(names)) != len(names):
        raise ProblemError("identifier collision among xvar, uvar and arbelem")
    for a in p.xvar:
        for b in p.xvar:
            if a != b and b.startswith(a):
                raise ProblemError(
                    f"independent variables {a!r} and {b!r} make derivative tokens ambiguous"
                )
    if p.contact and p.m != 1:
        raise ProblemError("contact symmetries require exactly one dependent variable")
    if not 0 <= p.nonclassical <= p.n:
        raise ProblemError(f"nonclassical must lie in 0..{p.n}")
    if p.nonclassical:
        if not p.qcond:
            raise ProblemError("nonclassical mode needs a nonempty qcond list")
        if len(set(p.qcond)) != len(p.qcond) or any(not 1 <= q <= p.m for q in p.qcond):
            raise ProblemError(f"qcond entries must be distinct integers in 1..{p.m}")
    elif p.qcond:
        raise ProblemError("qcond is only meaningful with nonclassical > 0")
    if p.zorder < 0 or p.zorder > p.jetorder:
        raise ProblemError("zorder must satisfy 0 <= zorder <= jetorder")
    if p.approxorder < 0:
        raise ProblemError("approxorder must be nonnegative")
    if p.arbelem and p.arborder < 0:
        raise ProblemError("arbitrary elements need arborder >= 0")
    if p.generalequiv and not p.arbelem:
        raise ProblemError("generalequiv requires arbitrary elements")
    modes = [bool(p.contact), bool(p.variational), bool(p.nonclassical), bool(p.arbelem)]
    if sum(modes) > 1:
        raise ProblemError("contact, variational, nonclassical and equivalence modes are exclusive")
    if p.approximate and (p.contact or p.variational or p.arbelem):
        raise ProblemError(
            "approximate mode is supported for point and conditional symmetries only"
        )
    if p.phiorder is not None and not 0 <= p.phiorder <= p.jetorder - 1:
        raise ProblemError("phiorder must lie in 0..jetorder-1")
    # generated names must not collide with user identifiers
    generated = set(p.unknowns)
    if p.approximate:
        generated |= {f"{u}{k}" for u in p.uvar for k in range(p.approxorder + 1)}
    for name in list(p.functions) + list(p.freepars) + names:
        if name in generated:
            raise ProblemError(f"identifier {name!r} collides with a generated name")
        if name in p.functions and name in names:
            raise ProblemError(f"{name!r} is declared both as a variable and a function")
    for name in list(p.functions) + list(p.freepars):
        if p.jet_info(name) is not None:
            raise ProblemError(f"identifier {name!r} collides with a jet variable")
    for fname, deps in p.functions.items():
        for d in deps:
            if d not in p.xvar and p.jet_info(d) is None and d not in p.arbelem:
                raise ProblemError(f"{fname} depends on unknown variable {d!r}")
