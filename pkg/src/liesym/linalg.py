"""Exact linear algebra over the rationals and over polynomial rings."""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

from .expr import ONE, Expression
from .poly import Poly, no_truncation

Row = Dict[int, int]


def _int_row(row: Dict[int, object]) -> Row:
    """Scale a rational row to a primitive integer row (first entry positive)."""
    den = 1
    for v in row.values():
        d = Fraction(v).denominator
        den = den * d // gcd(den, d)
    out = {k: int(Fraction(v) * den) for k, v in row.items() if v != 0}
    return _primitive(out)


def _primitive(row: Row) -> Row:
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            break
    if g > 1:
        row = {k: v // g for k, v in row.items()}
    return row


def echelon(rows: Sequence[Dict[int, object]], order: Optional[Sequence[int]] = None) -> Tuple[List[Row], List[int]]:
    """Fraction-free reduced echelon form.

    ``order`` lists column indices by elimination priority.  Returns the
    nonzero rows and their pivot columns; every pivot column is zero in all
    other rows.
    """
    rank_of = None if order is None else {c: i for i, c in enumerate(order)}

    def lead(row: Row) -> int:
        if rank_of is None:
            return min(row)
        return min(row, key=rank_of.__getitem__)

    basis: List[Row] = []
    pivots: List[int] = []
    for raw in rows:
        row = _int_row(raw)
        for b, p in zip(basis, pivots):
            c = row.get(p)
            if c:
                row = _combine(row, b, p)
        if not row:
            continue
        p = lead(row)
        if row[p] < 0:
            row = {k: -v for k, v in row.items()}
        for i, b in enumerate(basis):
            if b.get(p):
                basis[i] = _combine(b, row, p)
        basis.append(row)
        pivots.append(p)
    return basis, pivots


def _combine(row: Row, piv: Row, p: int) -> Row:
    """Eliminate column p of ``row`` using ``piv``; keeps integers, removes content."""
    a = piv[p]
    c = row[p]
    g = gcd(a, c)
    fa, fc = a // g, c // g
    if fa < 0:
        fa, fc = -fa, -fc
    out = {k: v * fa for k, v in row.items()}
    for k, v in piv.items():
        nv = out.get(k, 0) - fc * v
        if nv:
            out[k] = nv
        else:
            out.pop(k, None)
    return _primitive(out)


def rank(rows: Sequence[Dict[int, object]]) -> int:
    return len(echelon(rows)[0])


def nullspace(rows: Sequence[Dict[int, object]], ncols: int, order: Optional[Sequence[int]] = None) -> List[Dict[int, Fraction]]:
    basis, pivots = echelon(rows, order)
    piv_row = dict(zip(pivots, basis))
    free = [c for c in range(ncols) if c not in piv_row]
    out = []
    for f in free:
        v = {f: Fraction(1)}
        for p, r in piv_row.items():
            if f in r:
                v[p] = Fraction(-r[f], r[p])
        out.append(v)
    return out


def reduce_vectors(vectors: Sequence[Dict[int, object]], order: Sequence[int]) -> List[Dict[int, Fraction]]:
    """Reduced row echelon basis of the span, each scaled to leading entry 1."""
    basis, pivots = echelon(vectors, order)
    rank_of = {c: i for i, c in enumerate(order)}
    pairs = sorted(zip(pivots, basis), key=lambda t: rank_of[t[0]])
    out = []
    for p, r in pairs:
        lc = r[p]
        out.append({k: Fraction(v, lc) for k, v in r.items()})
    return out


def express(target: Dict[int, object], basis: Sequence[Dict[int, object]]) -> Optional[List[Fraction]]:
    """Coefficients c with sum c_i basis_i = target, or None if outside the span."""
    n = len(basis)
    if n == 0:
        return [] if not any(target.values()) else None
    # columns of the augmented system are the vector coordinates
    keys = sorted({k for b in basis for k in b} | set(target))
    rows = []
    for k in keys:
        row = {j: Fraction(b.get(k, 0)) for j, b in enumerate(basis) if b.get(k, 0)}
        t = Fraction(target.get(k, 0))
        if t:
            row[n] = t
        if row:
            rows.append(row)
    red, piv = echelon(rows)
    if n in piv:
        return None
    coeffs = [Fraction(0)] * n
    for r, p in zip(red, piv):
        coeffs[p] = Fraction(r.get(n, 0), r[p])
    # coefficients of a dependent basis are fixed at zero on free columns
    return coeffs


# ---------------------------------------------------------------------------
# polynomial matrices

def _row_to_polys(row: Sequence[Expression]) -> List[Poly]:
    den = ONE
    for e in row:
        if not e.den.is_const():
            den = den * Expression(e.den)
    out = []
    for e in row:
        s = e * den
        if not s.den.is_const():
            raise ValueError("could not clear denominators")
        c = Fraction(s.den.const_value())
        out.append(s.num.scale(Fraction(1) / c) if c != 1 else s.num)
    return out


def bareiss_rank(matrix: Sequence[Sequence[Expression]]) -> Tuple[int, List[Tuple[int, int]]]:
    """Generic rank over the rational-function field, with the pivot positions used."""
    with no_truncation():
        M = [_row_to_polys(r) for r in matrix]
        return _bareiss(M)[0:2]


def _bareiss(M: List[List[Poly]]):
    rows = len(M)
    cols = len(M[0]) if rows else 0
    prev = Poly.const(1)
    r = 0
    pivots: List[Tuple[int, int]] = []
    row_ids = list(range(rows))
    col_ids = list(range(cols))
    sign = 1
    for k in range(min(rows, cols)):
        found = None
        best = None
        for i in range(k, rows):
            for j in range(k, cols):
                e = M[i][j]
                if not e.is_zero():
                    size = len(e.terms)
                    if best is None or size < best:
                        best = size
                        found = (i, j)
                        if size == 1:
                            break
            if best == 1:
                break
        if found is None:
            break
        i, j = found
        if i != k:
            M[k], M[i] = M[i], M[k]
            row_ids[k], row_ids[i] = row_ids[i], row_ids[k]
            sign = -sign
        if j != k:
            for row in M:
                row[k], row[j] = row[j], row[k]
            col_ids[k], col_ids[j] = col_ids[j], col_ids[k]
            sign = -sign
        pivots.append((row_ids[k], col_ids[k]))
        piv = M[k][k]
        for i2 in range(k + 1, rows):
            a = M[i2][k]
            for j2 in range(k + 1, cols):
                val = piv * M[i2][j2] - a * M[k][j2]
                if not (prev.is_const() and prev.const_value() == 1):
                    q = val.exact_div(prev)
                    if q is None:
                        raise ArithmeticError("inexact Bareiss division")
                    val = q
                M[i2][j2] = val
            M[i2][k] = Poly()
        prev = piv
        r += 1
    return r, pivots, M, sign


def poly_det(matrix: Sequence[Sequence[Poly]]) -> Poly:
    n = len(matrix)
    if n == 0:
        return Poly.const(1)
    if any(len(r) != n for r in matrix):
        raise ValueError("determinant of a non-square matrix")
    with no_truncation():
        M = [list(r) for r in matrix]
        r, _, M, sign = _bareiss(M)
        if r < n:
            return Poly()
        d = M[n - 1][n - 1]
        return d if sign > 0 else -d


def expression_det(matrix: Sequence[Sequence[Expression]]) -> Expression:
    """Determinant of a square matrix of rational expressions."""
    n = len(matrix)
    if n == 0:
        return ONE
    den = ONE
    rows = []
    for r in matrix:
        rd = ONE
        for e in r:
            if not e.den.is_const():
                rd = rd * Expression(e.den)
        den = den * rd
        rows.append(_row_to_polys(r))
    return Expression(poly_det(rows)) / den
