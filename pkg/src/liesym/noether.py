"""Euler operator, variational symmetries and Noether fluxes."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .expr import ZERO, Expression, diff_partial, substitute_atoms, to_string
from .poly import FN, SYM, Atom
from .problem import JetVariable, Problem, build_jet
from .prolong import VectorField, prolong_point


class NoetherError(ValueError):
    pass


def _order_of(p: Problem, e: Expression) -> int:
    best = 0
    for a in e.all_atoms():
        if a[0] == SYM:
            names = [a[1]]
        elif a[0] == FN:
            names = list(a[2])
        else:
            continue
        for nm in names:
            info = p.jet_info(nm)
            if info is not None:
                best = max(best, info.order)
    return best


def _jets_of(p: Problem, alpha: int, order: int) -> List[JetVariable]:
    return [v for v in build_jet(p, maxorder=order) if v.dep == alpha]


def euler_operator(L: Expression, alpha: int, p: Problem) -> Expression:
    """Variational derivative of L with respect to u_alpha."""
    if not 0 <= alpha < p.m:
        raise NoetherError(f"dependent-variable index {alpha} out of range")
    r = _order_of(p, L)
    total = ZERO
    for v in _jets_of(p, alpha, r):
        d = diff_partial(L, p.jet_name(v))
        if d.is_zero():
            continue
        for i in v.index:
            d = p.D(d, i)
        total = total + (-d if v.order % 2 else d)
    return total


def _leading_derivative(p: Problem, e: Expression, alpha: int) -> Optional[JetVariable]:
    present = []
    for a in e.all_atoms():
        if a[0] == SYM:
            info = p.jet_info(a[1])
            if info is not None and info.dep == alpha and info.k is None:
                present.append(info)
    if not present:
        return None
    top = max(v.order for v in present)
    cands = sorted(v for v in present if v.order == top)
    for v in cands:
        if e.num.degree_in((SYM, p.jet_name(v))) == 1:
            return v
    return cands[0]


@dataclass
class EulerLagrange:
    equations: List[Expression]
    leading: List[Optional[JetVariable]]
    flipped: List[bool]
    solved: Dict[Atom, Expression]


def euler_lagrange(L: Expression, p: Problem) -> EulerLagrange:
    """Euler-Lagrange equations oriented so each leading derivative has a positive coefficient."""
    from .determining import solve_linear

    eqs, leads, flips = [], [], []
    solved: Dict[Atom, Expression] = {}
    for a in range(p.m):
        e = euler_operator(L, a, p)
        lead = _leading_derivative(p, e, a)
        flip = False
        if lead is not None:
            atom = (SYM, p.jet_name(lead))
            coeff = Expression(e.num).diff_atom(atom)
            if not coeff.is_zero():
                _, lc = coeff.num.leading()
                flip = lc < 0
            if flip:
                e = -e
            try:
                solved[atom] = solve_linear(e, atom)
            except ValueError:
                pass
        eqs.append(e)
        leads.append(lead)
        flips.append(flip)
    return EulerLagrange(eqs, leads, flips, solved)


def variational_condition(vf: VectorField, L: Expression, p: Problem) -> Expression:
    """Xi(L) + L * div(xi) - div(phi)."""
    r = max(_order_of(p, L), 1)
    pf = prolong_point(vf, p, maxorder=r)
    total = ZERO
    for i, x in enumerate(p.xvar):
        d = diff_partial(L, x)
        if not d.is_zero():
            total = total + pf.xi[i] * d
    for v, coeff in pf.eta.items():
        d = diff_partial(L, p.jet_name(v))
        if not d.is_zero():
            total = total + coeff * d
    for i in range(p.n):
        dx = p.D(pf.xi[i], i)
        if not dx.is_zero():
            total = total + L * dx
    phi = vf.phi or ()
    for i, ph in enumerate(phi):
        if not ph.is_zero():
            total = total - p.D(ph, i)
    return total


@dataclass
class ConservationLaw:
    fluxes: Tuple[Expression, ...]
    field: VectorField
    phi: Tuple[Expression, ...]
    divergence: Expression
    residual: Expression
    orientation: List[bool] = field(default_factory=list)

    def labelled(self, p: Problem) -> List[Tuple[str, str]]:
        return [(x, to_string(f)) for x, f in zip(p.xvar, self.fluxes)]


def characteristic(vf: VectorField, p: Problem) -> List[Expression]:
    out = []
    for a in range(p.m):
        q = vf.components[p.n + a]
        for j in range(p.n):
            q = q - vf.components[j] * p.jet_symbol(JetVariable(a, (j,)))
        out.append(q)
    return out


def _w_terms(Q: Sequence[Expression], L: Expression, p: Problem, r: int) -> List[Expression]:
    W = []
    for i in range(p.n):
        total = ZERO
        for a in range(p.m):
            first = diff_partial(L, p.jet_name(JetVariable(a, (i,))))
            if r == 1:
                total = total + Q[a] * first
                continue
            # symmetric second-order momenta; mixed entries share one jet coordinate
            P = []
            for j in range(p.n):
                v = JetVariable(a, tuple(sorted((i, j))))
                d = diff_partial(L, p.jet_name(v))
                P.append(d if i == j else d * Expression.const(1) / 2)
            inner = first
            for j in range(p.n):
                if not P[j].is_zero():
                    inner = inner - p.D(P[j], j)
            total = total + Q[a] * inner
            for j in range(p.n):
                if not P[j].is_zero():
                    total = total + p.D(Q[a], j) * P[j]
        W.append(total)
    return W


def noether_fluxes(vf: VectorField, phi: Optional[Sequence[Expression]], L: Expression, p: Problem) -> ConservationLaw:
    r = _order_of(p, L)
    if r > 2:
        raise NoetherError(f"Lagrangians of order {r} are not supported (order at most 2)")
    r = max(r, 1)
    phi = tuple(phi) if phi else tuple(ZERO for _ in p.xvar)
    if len(phi) != p.n:
        raise NoetherError(f"expected {p.n} divergence potentials, got {len(phi)}")
    vf_full = VectorField(vf.components[: p.n + p.m], "variational", None, phi)
    resid = variational_condition(vf_full, L, p)
    if not resid.is_zero():
        raise NoetherError(f"not a variational symmetry: residual {to_string(resid)}")
    Q = characteristic(vf, p)
    W = _w_terms(Q, L, p, r)
    fluxes = tuple(vf.components[i] * L + W[i] - phi[i] for i in range(p.n))
    div = ZERO
    for i, f in enumerate(fluxes):
        div = div + p.D(f, i)
    el = euler_lagrange(L, p)
    on_shell = substitute_atoms(div, el.solved) if el.solved else div
    return ConservationLaw(fluxes, vf, phi, div, on_shell, el.flipped)
