"""Lie brackets, commutator tables, standard algebras and distributions."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

from .expr import ONE, ZERO, Expression, diff_partial
from .linalg import bareiss_rank, echelon, express, expression_det
from .poly import no_truncation, truncate_epsilon
from .problem import JetVariable, Problem, build_jet
from .prolong import VectorField, prolong_point
from .solver import RewriteRule, apply_rules, field_vector

DEFAULT_MINOR_CAP = 20000
STANDARD_KINDS = ("isometry", "affine", "projective")


class AlgebraError(ValueError):
    pass


def field_coordinates(p: Problem) -> List[str]:
    """Names of the coordinates the components of a point field act on."""
    if p.approximate:
        us = [p.jet_name(JetVariable(a, (), 0)) for a in range(p.m)]
    else:
        us = list(p.uvar)
    return list(p.xvar) + us


def apply_field(vf: VectorField, f: Expression, coords: Sequence[str]) -> Expression:
    total = ZERO
    for c, name in zip(vf.components, coords):
        if c.is_zero():
            continue
        d = diff_partial(f, name)
        if not d.is_zero():
            total = total + c * d
    return total


def lie_bracket(a: VectorField, b: VectorField, p: Problem) -> VectorField:
    if a.flavor != b.flavor:
        raise AlgebraError(f"cannot bracket a {a.flavor} field with a {b.flavor} field")
    if a.flavor == "contact":
        raise AlgebraError("brackets are defined here for point fields only")
    coords = field_coordinates(p)
    if len(a.components) != len(coords) or len(b.components) != len(coords):
        raise AlgebraError("field length does not match the coordinates")
    comps = []
    with truncate_epsilon(p.approxorder) if p.approximate else no_truncation():
        for ak, bk in zip(a.components, b.components):
            c = apply_field(a, bk, coords) - apply_field(b, ak, coords)
            if p.approximate:
                c = Expression(c.num.truncated(), c.den)
            comps.append(c)
    return VectorField(tuple(comps), a.flavor)


# ---------------------------------------------------------------------------
# tables

@dataclass
class TableEntry:
    bracket: VectorField
    coefficients: Optional[List[Fraction]]

    @property
    def in_span(self) -> bool:
        return self.coefficients is not None


@dataclass
class CommutatorTable:
    entries: List[List[TableEntry]]

    @property
    def size(self) -> int:
        return len(self.entries)

    @property
    def closed(self) -> bool:
        return all(e.in_span for row in self.entries for e in row)

    def is_antisymmetric(self) -> bool:
        n = self.size
        for i in range(n):
            if not self.entries[i][i].bracket.is_zero():
                return False
            for j in range(i + 1, n):
                a, b = self.entries[i][j], self.entries[j][i]
                if not (a.bracket + b.bracket).is_zero():
                    return False
        return True

    def render(self, labels: Optional[Sequence[str]] = None) -> List[List[str]]:
        n = self.size
        labels = list(labels or [f"vf_{i + 1}" for i in range(n)])
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                e = self.entries[i][j]
                if e.coefficients is None:
                    row.append("outside span")
                    continue
                terms = []
                for c, lab in zip(e.coefficients, labels):
                    if c == 0:
                        continue
                    if c == 1:
                        terms.append(f"+{lab}")
                    elif c == -1:
                        terms.append(f"-{lab}")
                    else:
                        terms.append(f"{'+' if c > 0 else '-'}{abs(c)}*{lab}")
                s = "".join(terms).lstrip("+") or "0"
                row.append(s)
            out.append(row)
        return out


def _vectors(fields: Sequence[VectorField]):
    vecs = [field_vector(f) for f in fields]
    return vecs


def _index(vecs):
    keys = sorted({k for v in vecs for k in v}, key=repr)
    idx = {k: i for i, k in enumerate(keys)}
    return [{idx[k]: c for k, c in v.items()} for v in vecs], idx


def expand_in(target: VectorField, basis: Sequence[VectorField]) -> Optional[List[Fraction]]:
    vecs = _vectors(list(basis) + [target])
    ivecs, _ = _index(vecs)
    return express(ivecs[-1], ivecs[:-1])


def commutator_table(fields: Sequence[VectorField], p: Problem) -> CommutatorTable:
    n = len(fields)
    brackets: Dict[Tuple[int, int], VectorField] = {}
    for i in range(n):
        for j in range(i + 1, n):
            brackets[(i, j)] = lie_bracket(fields[i], fields[j], p)
    all_fields = list(fields) + list(brackets.values())
    ivecs, _ = _index(_vectors(all_fields))
    base = ivecs[:n]
    entries: List[List[Optional[TableEntry]]] = [[None] * n for _ in range(n)]
    zero = VectorField(tuple(ZERO for _ in fields[0].components), fields[0].flavor) if n else None
    for i in range(n):
        entries[i][i] = TableEntry(zero, [Fraction(0)] * n)
    for k, ((i, j), br) in enumerate(brackets.items()):
        coeffs = express(ivecs[n + k], base)
        entries[i][j] = TableEntry(br, coeffs)
        neg = None if coeffs is None else [-c for c in coeffs]
        entries[j][i] = TableEntry(br.scale(-1), neg)
    return CommutatorTable(entries)


def _span_basis(fields: Sequence[VectorField]) -> List[VectorField]:
    kept: List[VectorField] = []
    for f in fields:
        if f.is_zero():
            continue
        ivecs, _ = _index(_vectors(kept + [f]))
        if len(echelon(ivecs)[0]) > len(kept):
            kept.append(f)
    return kept


def _require_closed(fields: Sequence[VectorField], p: Problem) -> CommutatorTable:
    table = commutator_table(fields, p)
    if not table.closed:
        raise AlgebraError("the fields do not close under the bracket")
    return table


def is_abelian(fields: Sequence[VectorField], p: Problem) -> bool:
    table = _require_closed(fields, p)
    return all(e.bracket.is_zero() for row in table.entries for e in row)


def derived_series(fields: Sequence[VectorField], p: Problem) -> List[int]:
    """Dimensions of the derived series, starting with the algebra itself."""
    _require_closed(fields, p)
    current = _span_basis(fields)
    dims = [len(current)]
    while current:
        brs = [lie_bracket(a, b, p) for a, b in combinations(current, 2)]
        nxt = _span_basis(brs)
        if len(nxt) == len(current):
            break
        current = nxt
        dims.append(len(current))
    return dims


def is_solvable(fields: Sequence[VectorField], p: Problem) -> bool:
    return derived_series(fields, p)[-1] == 0


# ---------------------------------------------------------------------------
# standard algebras

def generate_standard_algebra(kind: str, p: Problem) -> List[VectorField]:
    if kind not in STANDARD_KINDS:
        raise AlgebraError(f"unknown algebra kind {kind!r}; choose from {', '.join(STANDARD_KINDS)}")
    coords = [Expression.symbol(c) for c in field_coordinates(p)]
    d = len(coords)

    def vf(comps):
        return VectorField(tuple(comps), "approximate" if p.approximate else "point")

    def unit(i, coef=ONE):
        return [coef if k == i else ZERO for k in range(d)]

    out = [vf(unit(i)) for i in range(d)]
    if kind == "isometry":
        for i in range(d):
            for j in range(i + 1, d):
                comps = [ZERO] * d
                comps[i] = coords[j]
                comps[j] = -coords[i]
                out.append(vf(comps))
        return out
    for i in range(d):
        for j in range(d):
            out.append(vf(unit(i, coords[j])))
    if kind == "projective":
        for i in range(d):
            out.append(vf([coords[i] * c for c in coords]))
    return out


# ---------------------------------------------------------------------------
# distributions

@dataclass
class Distribution:
    columns: List[str]
    rows: List[List[Expression]]

    def substituted(self, rules: Sequence[RewriteRule], p: Problem) -> "Distribution":
        rows = [[apply_rules(e, rules, p) for e in row] for row in self.rows]
        return Distribution(self.columns, rows)


def distribution(fields: Sequence[VectorField], p: Problem) -> Distribution:
    if p.approximate:
        raise AlgebraError("distributions are defined for exact point fields")
    jets = build_jet(p)
    columns = list(p.xvar) + [p.jet_name(v) for v in jets]
    rows = []
    for f in fields:
        if f.flavor not in ("point", "variational", "equivalence"):
            raise AlgebraError(f"distribution of a {f.flavor} field")
        pf = prolong_point(f, p)
        rows.append(list(pf.xi) + [pf.eta[v] for v in jets])
    return Distribution(columns, rows)


def rank(dist: Distribution) -> Tuple[int, List[Tuple[int, int]]]:
    """Generic rank and the (row, column) pivots that realise it."""
    if not dist.rows:
        return 0, []
    return bareiss_rank(dist.rows)


def minors(dist: Distribution, k: int, cap: int = DEFAULT_MINOR_CAP) -> List[Tuple[Tuple[int, ...], Tuple[int, ...], Expression]]:
    nr = len(dist.rows)
    nc = len(dist.columns)
    if not 1 <= k <= min(nr, nc):
        raise AlgebraError(f"minor order {k} out of range 1..{min(nr, nc)}")
    from math import comb

    total = comb(nr, k) * comb(nc, k)
    if total > cap:
        raise AlgebraError(f"{total} minors requested; the cap is {cap}")
    out = []
    for rs in combinations(range(nr), k):
        for cs in combinations(range(nc), k):
            sub = [[dist.rows[r][c] for c in cs] for r in rs]
            out.append((rs, cs, expression_det(sub)))
    return out
