"""Invariance conditions, equation manifolds and determining systems."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Dict, List, Optional, Sequence, Tuple

from .expr import (
    ZERO,
    Expression,
    NotPolynomialError,
    diff_partial,
    substitute_atoms,
    to_string,
)
from .poly import APP, EPSILON, FN, SYM, Atom, Poly, truncate_epsilon
from .problem import JetVariable, Problem, build_jet
from .prolong import (
    ProlongedField,
    VectorField,
    expand_dependent,
    make_generic_generator,
    prolong,
)


class DeterminingError(ValueError):
    pass


# ---------------------------------------------------------------------------
# manifold

@dataclass
class Manifold:
    """Solved derivatives: atom -> expression free of every key after closure."""

    rules: Dict[Atom, Expression] = field(default_factory=dict)

    def __len__(self):
        return len(self.rules)

    def keys(self) -> List[Atom]:
        return list(self.rules)

    def add(self, atom: Atom, value: Expression) -> None:
        if atom in self.rules:
            raise DeterminingError(f"{to_string(Expression.from_atom(atom))} is solved for twice")
        self.rules[atom] = value

    def close(self) -> "Manifold":
        limit = len(self.rules) + 2
        keys = set(self.rules)
        for _ in range(limit):
            changed = False
            for a, v in list(self.rules.items()):
                if v.all_atoms() & keys:
                    nv = substitute_atoms(v, self.rules)
                    if nv != v:
                        self.rules[a] = nv
                        changed = True
            if not changed:
                break
        for a, v in self.rules.items():
            if v.all_atoms() & keys:
                raise DeterminingError(
                    f"cyclic solved forms: {to_string(Expression.from_atom(a))} still depends on solved derivatives"
                )
        return self

    def apply(self, e: Expression) -> Expression:
        if not self.rules:
            return e
        out = substitute_atoms(e, self.rules)
        if EPSILON in out.num.atoms():
            return Expression(out.num.truncated(), out.den)
        return out

    def as_strings(self) -> List[Tuple[str, str]]:
        return [(to_string(Expression.from_atom(a)), to_string(v)) for a, v in self.rules.items()]


def solve_linear(e: Expression, atom: Atom) -> Expression:
    """Solve ``e = 0`` for ``atom`` when ``e`` is linear in it."""
    name = to_string(Expression.from_atom(atom))
    if atom in e.den.atoms():
        raise DeterminingError(f"{name} occurs in a denominator of {e}")
    deg = e.num.degree_in(atom)
    if deg == 0:
        raise DeterminingError(f"leading derivative {name} does not occur in {e}")
    if deg > 1:
        raise DeterminingError(f"equation {e} is not linear in its leading derivative {name}")
    num = Expression(e.num)
    a = num.diff_atom(atom)
    if atom in a.all_atoms():
        raise DeterminingError(f"cannot isolate {name} in {e}")
    for x in a.atoms():
        if x[0] == APP and atom in Expression.from_key(x[2]).all_atoms():
            raise DeterminingError(f"{name} also occurs inside {to_string(Expression.from_atom(x))}")
    b = num - a * Expression.from_atom(atom)
    if atom in b.all_atoms():
        raise DeterminingError(f"{name} occurs non-polynomially in {e}")
    return -b / a


def _eps_coefficients(e: Expression, top: int) -> List[Expression]:
    if EPSILON in e.den.atoms():
        raise DeterminingError("epsilon in a denominator is not supported")
    parts = e.num.coefficients_in([EPSILON])
    out = [ZERO] * (top + 1)
    for mono, coeff in parts.items():
        k = mono[0][1] if mono else 0
        if k <= top:
            out[k] = out[k] + Expression(coeff, e.den)
    return out


def _leading_atom_of_order(p: Problem, a: Atom, k: int) -> Atom:
    info = p.jet_info(a[1])
    return (SYM, p.jet_name(JetVariable(info.dep, info.index, k)))


def invariant_surface_conditions(p: Problem, vf: VectorField) -> List[Tuple[Atom, Expression]]:
    """Q_alpha and their differential consequences, each paired with the derivative it is solved for."""
    star = p.nonclassical - 1
    out = []
    for q in p.qcond:
        a = q - 1
        Q = -vf.components[p.n + a]
        for i in range(p.n):
            Q = Q + vf.components[i] * p.jet_symbol(JetVariable(a, (i,)))
        out.append(((SYM, p.jet_name(JetVariable(a, (star,)))), Q))
        for order in range(1, p.jetorder):
            for K in combinations_with_replacement(range(p.n), order):
                DQ = Q
                for i in K:
                    DQ = p.D(DQ, i)
                lhs = JetVariable(a, tuple(sorted(K + (star,))))
                out.append(((SYM, p.jet_name(lhs)), DQ))
    return out


def solve_leading(p: Problem, vf: Optional[VectorField] = None) -> Manifold:
    man = Manifold()
    if p.mode == "variational":
        return man
    if p.approximate:
        top = p.approxorder
        for eq, lead in zip(p.diffeqs, p.leadders):
            if lead[0] != SYM or p.jet_info(lead[1]) is None:
                raise DeterminingError("leading derivatives must be jet variables in approximate mode")
            parts = _eps_coefficients(expand_dependent(p, eq), top)
            for k, part in enumerate(parts):
                part = man.apply(part)
                man.add(_leading_atom_of_order(p, lead, k), solve_linear(part, _leading_atom_of_order(p, lead, k)))
    else:
        for eq, lead in zip(p.diffeqs, p.leadders):
            man.add(lead, solve_linear(eq, lead))
    if p.mode == "conditional":
        vf = vf if vf is not None else make_generic_generator(p)
        if p.approximate:
            top = p.approxorder
            for atom, Q in invariant_surface_conditions(p, vf):
                parts = _eps_coefficients(expand_dependent(p, Q), top)
                for k, part in enumerate(parts):
                    target = _leading_atom_of_order(p, atom, k)
                    man.add(target, solve_linear(man.apply(part), target))
        else:
            for atom, Q in invariant_surface_conditions(p, vf):
                man.add(atom, solve_linear(Q, atom))
    return man.close()


# ---------------------------------------------------------------------------
# invariance condition

def _derivative_targets(p: Problem) -> List[JetVariable]:
    return build_jet(p)


def invariance_condition(pf: ProlongedField, man: Manifold, p: Problem) -> List[Expression]:
    if p.mode == "variational":
        from .noether import variational_condition

        vf = pf.field
        return [man.apply(variational_condition(vf, p.lagrangian, p))]
    frozen = p.arbelem
    out = []
    for eq in p.diffeqs:
        total = ZERO
        for i, x in enumerate(p.xvar):
            d = diff_partial(eq, x, frozen)
            if not d.is_zero():
                total = total + pf.xi[i] * expand_dependent(p, d)
        for v in _derivative_targets(p):
            d = diff_partial(eq, p.jet_name(v), frozen)
            if d.is_zero():
                continue
            if v not in pf.eta:
                raise DeterminingError(f"prolongation misses {p.jet_name(v)}")
            total = total + pf.eta[v] * expand_dependent(p, d)
        if p.arbelem:
            for a in sorted(eq.all_atoms()):
                if a[0] != FN or a[1] not in p.arbelem:
                    continue
                if a not in pf.mu:
                    raise DeterminingError(
                        f"{to_string(Expression.from_atom(a))} exceeds the prolongation order arborder={p.arborder}"
                    )
                d = diff_partial(eq, Expression.from_atom(a), frozen)
                if not d.is_zero():
                    total = total + pf.mu[a] * d
        if p.approximate:
            total = Expression(total.num.truncated(), total.den)
            with truncate_epsilon(p.approxorder):
                total = man.apply(total)
        else:
            total = man.apply(total)
        out.append(total)
    return out


# ---------------------------------------------------------------------------
# splitting

@dataclass
class DeterminingSystem:
    problem: Problem
    equations: Tuple[Expression, ...]
    unknowns: Dict[str, Tuple[str, ...]]
    linear: bool = True
    eps_orders: Optional[Tuple[int, ...]] = None
    nonvanishing: Tuple[Expression, ...] = ()
    split_variables: Tuple[str, ...] = ()

    def __len__(self):
        return len(self.equations)

    def by_order(self) -> Dict[int, List[Expression]]:
        if self.eps_orders is None:
            return {0: list(self.equations)}
        out: Dict[int, List[Expression]] = {}
        for k, e in zip(self.eps_orders, self.equations):
            out.setdefault(k, []).append(e)
        return dict(sorted(out.items()))

    def lines(self) -> List[str]:
        return [to_string(e) for e in self.equations]


def _unknown_dep_names(p: Problem) -> set:
    out = set()
    for deps in p.unknowns.values():
        out.update(deps)
    return out


def split_variables(cond: Expression, p: Problem) -> set:
    """Atoms to split over: free derivatives plus declared non-polynomial kernels."""
    deps = _unknown_dep_names(p)
    unknown_names = set(p.unknowns)
    base: set = set()
    for a in cond.num.atoms():
        if a == EPSILON:
            base.add(a)
        elif a[0] == SYM and p.jet_info(a[1]) is not None and a[1] not in deps:
            base.add(a)
        elif a[0] == FN and a[1] in p.arbelem and a[3]:
            base.add(a)
    base_names = {a[1] for a in base if a[0] == SYM}
    nonpoly = set(p.nonpolyders)
    result = set(base)
    for a in cond.num.atoms():
        if a[0] == APP:
            inner = Expression.from_key(a[2])
            hit = {x[1] for x in inner.all_atoms() if x[0] == SYM and p.jet_info(x[1]) is not None and x[1] not in deps}
            if not hit:
                continue
            missing = hit - nonpoly
            if missing:
                raise NotPolynomialError(
                    f"{to_string(Expression.from_atom(a))} depends on {', '.join(sorted(missing))};"
                    " declare it in nonpolyders",
                    Expression.from_atom(a),
                )
            result.add(a)
        elif a[0] == FN and a[1] not in unknown_names and a[1] not in p.arbelem:
            hit = set(a[2]) & base_names
            if hit:
                raise NotPolynomialError(
                    f"function {a[1]} depends on the free derivative(s) {', '.join(sorted(hit))}",
                    Expression.from_atom(a),
                )
    return result


def normalize_equation(poly: Poly) -> Poly:
    """Integer primitive form with positive leading coefficient."""
    if poly.is_zero():
        return poly
    c = poly.content()
    _, lc = poly.leading()
    if lc < 0:
        c = -c
    return poly.scale(Fraction(1) / c)


def split(conds: Sequence[Expression], p: Problem) -> DeterminingSystem:
    seen = {}
    eqs: List[Expression] = []
    orders: List[int] = []
    nonvanishing: List[Expression] = []
    names: set = set()
    for cond in conds:
        if not cond.den.is_const():
            d = Expression(cond.den)
            if d not in nonvanishing:
                nonvanishing.append(d)
        atoms = split_variables(cond, p)
        for a in atoms:
            names.add(to_string(Expression.from_atom(a)))
        parts = cond.num.coefficients_in(atoms)
        for mono in sorted(parts, key=_mono_sort):
            coeff = normalize_equation(parts[mono])
            if coeff.is_zero():
                continue
            k = coeff.key()
            if k in seen:
                continue
            seen[k] = len(eqs)
            eqs.append(Expression(coeff))
            orders.append(dict(mono).get(EPSILON, 0))
    return DeterminingSystem(
        problem=p,
        equations=tuple(eqs),
        unknowns=dict(p.unknowns),
        linear=p.mode != "conditional",
        eps_orders=tuple(orders) if p.approximate else None,
        nonvanishing=tuple(nonvanishing),
        split_variables=tuple(sorted(names)),
    )


def _mono_sort(m):
    from .poly import mono_degree

    eps = dict(m).get(EPSILON, 0)
    return (eps, mono_degree(m), tuple((repr(a), -e) for a, e in m))


# ---------------------------------------------------------------------------
# pipeline

@dataclass
class Pipeline:
    problem: Problem
    field: VectorField
    prolonged: ProlongedField
    manifold: Manifold
    conditions: List[Expression]
    system: DeterminingSystem


def run_pipeline(p: Problem) -> Pipeline:
    vf = make_generic_generator(p)
    man = solve_leading(p, vf)
    pf = prolong(vf, p)
    conds = invariance_condition(pf, man, p)
    ds = split(conds, p)
    return Pipeline(p, vf, pf, man, conds, ds)


def determining_system(p: Problem) -> DeterminingSystem:
    return run_pipeline(p).system
