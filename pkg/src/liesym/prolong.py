"""Infinitesimal generators and their prolongations."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Dict, List, Optional, Sequence, Tuple

from .expr import ONE, ZERO, Expression, diff_partial
from .poly import EPSILON, FN, SYM, Atom, truncate_epsilon
from .problem import JetVariable, Problem, ProblemError

FLAVORS = ("point", "conditional", "contact", "variational", "equivalence", "approximate")


@dataclass(frozen=True)
class VectorField:
    """Components ordered as (xi_1..xi_n, eta_1..eta_m, mu_1..mu_l)."""

    components: Tuple[Expression, ...]
    flavor: str = "point"
    omega: Optional[Expression] = None
    phi: Tuple[Expression, ...] = ()

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise ValueError(f"unknown flavor {self.flavor!r}")

    def __len__(self):
        return len(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def _combine(self, other: "VectorField", a, b) -> "VectorField":
        if self.flavor != other.flavor or len(self) != len(other):
            raise ValueError("cannot combine vector fields of different shape")
        comps = tuple(x * a + y * b for x, y in zip(self.components, other.components))
        omega = None
        if self.omega is not None and other.omega is not None:
            omega = self.omega * a + other.omega * b
        phi = tuple(x * a + y * b for x, y in zip(self.phi, other.phi))
        return VectorField(comps, self.flavor, omega, phi)

    def __add__(self, other):
        return self._combine(other, 1, 1)

    def __sub__(self, other):
        return self._combine(other, 1, -1)

    def scale(self, c) -> "VectorField":
        c = Expression.const(c) if not isinstance(c, Expression) else c
        return VectorField(
            tuple(x * c for x in self.components),
            self.flavor,
            None if self.omega is None else self.omega * c,
            tuple(x * c for x in self.phi),
        )

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components) and all(c.is_zero() for c in self.phi)


@dataclass
class ProlongedField:
    """Prolonged coefficients keyed by (physical) jet variable.

    ``eta[v]`` is the coefficient of d/du_v; ``mu`` maps arbitrary-element
    atoms (and their derivatives) to their coefficients in equivalence mode.
    """

    field: VectorField
    xi: Tuple[Expression, ...]
    eta: Dict[JetVariable, Expression]
    mu: Dict[Atom, Expression] = field(default_factory=dict)

    def coefficient(self, v: JetVariable) -> Expression:
        return self.eta[v]

    def by_name(self, p: Problem) -> Dict[str, Expression]:
        out = {x: c for x, c in zip(p.xvar, self.xi)}
        for v, c in self.eta.items():
            out[p.jet_name(v)] = c
        return out


def component_labels(p: Problem) -> List[str]:
    labels = [f"xi_{x}" for x in p.xvar] + [f"eta_{u}" for u in p.uvar]
    if p.mode == "equivalence":
        labels += [f"mu_{a}" for a in p.arbelem]
    return labels


# ---------------------------------------------------------------------------
# approximate expansion

def expanded_symbol(p: Problem, v: JetVariable) -> Expression:
    """u_v as sum_k epsilon^k u_(k)v (truncation is applied by the caller's context)."""
    if not p.approximate:
        return p.jet_symbol(JetVariable(v.dep, v.index))
    eps = Expression.from_atom(EPSILON)
    total = ZERO
    for k in range(p.approxorder + 1):
        total = total + eps ** k * p.jet_symbol(JetVariable(v.dep, v.index, k))
    return total


def expand_dependent(p: Problem, e: Expression) -> Expression:
    """Replace physical jet variables by their epsilon expansions (within truncation)."""
    if not p.approximate:
        return e
    table = {}
    for a in e.all_atoms():
        if a[0] == SYM:
            info = p.jet_info(a[1])
            if info is not None and info.k is None:
                table[a] = expanded_symbol(p, info)
    if not table:
        return e
    from .expr import substitute_atoms

    with truncate_epsilon(p.approxorder):
        out = substitute_atoms(e, table)
        return Expression(out.num.truncated(), out.den)


def _successor_name(name: str) -> Optional[Tuple[str, int]]:
    for prefix in ("xi", "eta"):
        if name.startswith(prefix):
            rest = name[len(prefix):]
            digits, sep, tail = rest.partition("_")
            if sep and digits.isdigit():
                return f"{prefix}{int(digits) + 1}_{tail}", int(digits) + 1
    return None


def recursion_operator(p: Problem, e: Expression) -> Expression:
    """The operator R: kernels of order k map to order k+1, u_(k) to (k+1) u_(k+1)."""
    top = p.approxorder

    def sym_rule(name: str) -> Optional[Expression]:
        info = p.jet_info(name)
        if info is None or info.k is None or info.k + 1 > top:
            return None
        return Expression.const(info.k + 1) * p.jet_symbol(JetVariable(info.dep, info.index, info.k + 1))

    chained = p.derivation(sym_rule)
    total = chained(e)
    for a in e.atoms():
        if a[0] != FN:
            continue
        succ = _successor_name(a[1])
        if succ is None or succ[1] > top:
            continue
        nxt = Expression.from_atom((FN, succ[0], a[2], a[3]))
        total = total + e.diff_atom(a) * nxt
    return total


# ---------------------------------------------------------------------------
# generic generators

def _conditional_head(p: Problem) -> List[Optional[Expression]]:
    """Normalised xi components in conditional mode (None where unknown)."""
    star = p.nonclassical - 1
    out: List[Optional[Expression]] = []
    for j in range(p.n):
        if j < star:
            out.append(ZERO)
        elif j == star:
            out.append(ONE)
        else:
            out.append(None)
    return out


def make_generic_generator(p: Problem) -> VectorField:
    mode = p.mode
    if p.approximate:
        eps = Expression.from_atom(EPSILON)
        head = _conditional_head(p) if mode == "conditional" else [None] * p.n

        def expand(prefix: str, name: str) -> Expression:
            term = p.unknown_kernel(f"{prefix}0_{name}")
            total = term
            with truncate_epsilon(p.approxorder):
                for k in range(1, p.approxorder + 1):
                    term = recursion_operator(p, term) * Fraction(1, k)
                    total = total + eps ** k * term
                return Expression(total.num.truncated(), total.den)

        comps = [h if h is not None else expand("xi", x) for h, x in zip(head, p.xvar)]
        comps += [expand("eta", u) for u in p.uvar]
        return VectorField(tuple(comps), "approximate")
    if mode == "contact":
        omega = p.unknown_kernel("omega")
        xi, eta = contact_components(omega, p)
        return VectorField(tuple(xi) + (eta,), "contact", omega=omega)
    if mode == "conditional":
        head = _conditional_head(p)
        comps = [h if h is not None else p.unknown_kernel(f"xi_{x}") for h, x in zip(head, p.xvar)]
        comps += [p.unknown_kernel(f"eta_{u}") for u in p.uvar]
        return VectorField(tuple(comps), "conditional")
    comps = [p.unknown_kernel(f"xi_{x}") for x in p.xvar] + [p.unknown_kernel(f"eta_{u}") for u in p.uvar]
    if mode == "equivalence":
        comps += [p.unknown_kernel(f"mu_{a}") for a in p.arbelem]
        return VectorField(tuple(comps), "equivalence")
    if mode == "variational":
        phi = tuple(p.unknown_kernel(f"phi_{x}") for x in p.xvar)
        return VectorField(tuple(comps), "variational", phi=phi)
    return VectorField(tuple(comps), "point")


# ---------------------------------------------------------------------------
# prolongation

def _multi_indices(n: int, order: int):
    return combinations_with_replacement(range(n), order)


def _recursion(
    p: Problem,
    xi: Sequence[Expression],
    eta: Sequence[Expression],
    maxorder: int,
    seed: Optional[Dict[JetVariable, Expression]] = None,
) -> Dict[JetVariable, Expression]:
    out: Dict[JetVariable, Expression] = {}
    for a in range(p.m):
        out[JetVariable(a, ())] = eta[a]
    if seed:
        out.update(seed)
    if maxorder < 1:
        return out
    dxi = [[p.D(x, i) for x in xi] for i in range(p.n)]
    for order in range(1, maxorder + 1):
        for a in range(p.m):
            for idx in _multi_indices(p.n, order):
                v = JetVariable(a, idx)
                if v in out:
                    continue
                i = idx[-1]
                prev = out[JetVariable(a, idx[:-1])]
                total = p.D(prev, i)
                for j in range(p.n):
                    if dxi[i][j].is_zero():
                        continue
                    u_next = expanded_symbol(p, JetVariable(a, tuple(sorted(idx[:-1] + (j,)))))
                    total = total - u_next * dxi[i][j]
                if p.approximate:
                    total = Expression(total.num.truncated(), total.den)
                out[v] = total
    return out


def prolong_point(vf: VectorField, p: Problem, maxorder: Optional[int] = None) -> ProlongedField:
    r = p.jetorder if maxorder is None else maxorder
    xi = vf.components[: p.n]
    eta = vf.components[p.n : p.n + p.m]
    return ProlongedField(vf, tuple(xi), _recursion(p, xi, eta, r))


def contact_components(omega: Expression, p: Problem) -> Tuple[List[Expression], Expression]:
    if p.m != 1:
        raise ProblemError("contact transformations need exactly one dependent variable")
    frozen = p.arbelem
    firsts = [p.jet_name(JetVariable(0, (i,))) for i in range(p.n)]
    d_first = [diff_partial(omega, f, frozen) for f in firsts]
    xi = [-d for d in d_first]
    eta = omega
    for f, d in zip(firsts, d_first):
        eta = eta - Expression.symbol(f) * d
    return xi, eta


def prolong_contact(omega: Expression, p: Problem, maxorder: Optional[int] = None) -> ProlongedField:
    if p.m != 1:
        raise ProblemError("contact transformations need exactly one dependent variable")
    allowed = set(p.xvar) | {p.uvar[0]} | {p.jet_name(JetVariable(0, (i,))) for i in range(p.n)}
    for a in omega.all_atoms():
        if a[0] == SYM and p.jet_info(a[1]) is not None and a[1] not in allowed:
            raise ProblemError("the characteristic function may depend on first derivatives only")
    xi, eta = contact_components(omega, p)
    d_u = diff_partial(omega, p.uvar[0])
    seed = {}
    for i, x in enumerate(p.xvar):
        ui = p.jet_symbol(JetVariable(0, (i,)))
        seed[JetVariable(0, (i,))] = diff_partial(omega, x) + ui * d_u
    r = p.jetorder if maxorder is None else maxorder
    vf = VectorField(tuple(xi) + (eta,), "contact", omega=omega)
    return ProlongedField(vf, tuple(xi), _recursion(p, xi, [eta], r, seed))


def prolong_approx(vf: VectorField, p: Problem, maxorder: Optional[int] = None) -> ProlongedField:
    top = p.approxorder
    for c in vf.components:
        if c.num.degree_in(EPSILON) > top or c.den.degree_in(EPSILON) > 0:
            raise ProblemError(f"component {c} has epsilon to a power above approxorder={top}")
    r = p.jetorder if maxorder is None else maxorder
    xi = vf.components[: p.n]
    eta = vf.components[p.n : p.n + p.m]
    with truncate_epsilon(top):
        coeffs = _recursion(p, xi, eta, r)
    return ProlongedField(vf, tuple(xi), coeffs)


def _arb_derivative_atoms(p: Problem, order: int):
    for name in p.arbelem:
        for combo in combinations_with_replacement(p.zvars, order):
            yield name, combo


def prolong_equivalence(vf: VectorField, p: Problem, maxorder: Optional[int] = None) -> ProlongedField:
    if not p.arbelem:
        raise ProblemError("equivalence prolongation needs arbitrary elements")
    if p.arborder < 0:
        raise ProblemError("arborder must be nonnegative in equivalence mode")
    for eq in p.diffeqs:
        for a in eq.all_atoms():
            if a[0] == FN and a[1] in p.arbelem and len(a[3]) > p.arborder:
                raise ProblemError(
                    f"{a[1]} is differentiated {len(a[3])} times but arborder={p.arborder}"
                )
    r = p.jetorder if maxorder is None else maxorder
    xi = vf.components[: p.n]
    eta = vf.components[p.n : p.n + p.m]
    mu = vf.components[p.n + p.m :]
    eta_coeffs = _recursion(p, xi, eta, max(r, p.zorder))

    # infinitesimals of the z coordinates
    zeta: List[Expression] = []
    for z in p.zvars:
        if z in p.xvar:
            zeta.append(xi[p.xvar.index(z)])
        else:
            zeta.append(eta_coeffs[p.jet_info(z)])
    N = len(p.zvars)
    tD = [p.equiv_derivative_op(b) for b in range(N)]
    dzeta = [[tD[b](zeta[g]) for g in range(N)] for b in range(N)]

    mu_coeffs: Dict[Atom, Expression] = {}
    for j, name in enumerate(p.arbelem):
        mu_coeffs[(FN, name, p.zvars, ())] = mu[j]
    order_pos = {z: i for i, z in enumerate(p.zvars)}
    for order in range(1, p.arborder + 1):
        for name, combo in _arb_derivative_atoms(p, order):
            prev_atom = (FN, name, p.zvars, combo[:-1])
            beta = order_pos[combo[-1]]
            total = tD[beta](mu_coeffs[prev_atom])
            for g in range(N):
                if dzeta[beta][g].is_zero():
                    continue
                derivs = tuple(sorted(combo[:-1] + (p.zvars[g],), key=order_pos.__getitem__))
                total = total - Expression.from_atom((FN, name, p.zvars, derivs)) * dzeta[beta][g]
            mu_coeffs[(FN, name, p.zvars, combo)] = total
    return ProlongedField(vf, tuple(xi), eta_coeffs, mu_coeffs)


def prolong(vf: VectorField, p: Problem, maxorder: Optional[int] = None) -> ProlongedField:
    """Dispatch on the problem's mode."""
    if p.approximate:
        return prolong_approx(vf, p, maxorder)
    if p.mode == "contact" and vf.omega is not None:
        return prolong_contact(vf.omega, p, maxorder)
    if p.mode == "equivalence":
        return prolong_equivalence(vf, p, maxorder)
    return prolong_point(vf, p, maxorder)
