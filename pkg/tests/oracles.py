"""Reference computations that avoid the code paths under test."""

from fractions import Fraction
from itertools import permutations

from liesym.expr import ZERO, Expression
from liesym.solver import candidate_field, parse_solution_file

# --- expression trees -------------------------------------------------------
# ("c", q) | ("s", name) | ("+", a, b) | ("*", a, b) | ("^", a, n) | ("exp", a) | ("/", a, b)


def build(t) -> Expression:
    op = t[0]
    if op == "c":
        return Expression.const(t[1])
    if op == "s":
        return Expression.symbol(t[1])
    if op == "+":
        return build(t[1]) + build(t[2])
    if op == "*":
        return build(t[1]) * build(t[2])
    if op == "/":
        return build(t[1]) / build(t[2])
    if op == "^":
        return build(t[1]) ** t[2]
    if op == "exp":
        return Expression.apply("exp", build(t[1]))
    raise ValueError(op)


def tree_diff(t, v):
    """Textbook differentiation rules applied to the tree itself."""
    op = t[0]
    if op == "c":
        return ("c", 0)
    if op == "s":
        return ("c", 1 if t[1] == v else 0)
    if op == "+":
        return ("+", tree_diff(t[1], v), tree_diff(t[2], v))
    if op == "*":
        return ("+", ("*", tree_diff(t[1], v), t[2]), ("*", t[1], tree_diff(t[2], v)))
    if op == "/":
        num = ("+", ("*", tree_diff(t[1], v), t[2]), ("*", ("c", -1), ("*", t[1], tree_diff(t[2], v))))
        return ("/", num, ("^", t[2], 2))
    if op == "^":
        n = t[2]
        if n == 0:
            return ("c", 0)
        return ("*", ("*", ("c", n), ("^", t[1], n - 1)), tree_diff(t[1], v))
    if op == "exp":
        return ("*", t, tree_diff(t[1], v))
    raise ValueError(op)


# --- total derivative through a concrete solution ----------------------------

def jet_values(p, f: Expression):
    """Map every jet symbol of a scalar problem to the matching derivative of f."""
    from liesym.expr import diff_partial
    from liesym.problem import build_jet

    table = {}
    for v in build_jet(p, maxorder=p.jetorder + 3):
        g = f
        for i in v.index:
            g = diff_partial(g, p.xvar[i])
        table[p.jet_name(v)] = g
    return table


# --- brackets ---------------------------------------------------------------

def bracket_by_action(a, b, coords):
    """[A, B] computed from its action A(B x_k) - B(A x_k) on each coordinate."""
    from liesym.expr import diff_partial

    def act(field, f):
        out = ZERO
        for c, x in zip(field, coords):
            out = out + c * diff_partial(f, x)
        return out

    out = []
    for x in coords:
        X = Expression.symbol(x)
        out.append(act(a, act(b, X)) - act(b, act(a, X)))
    return out


# --- determinants -----------------------------------------------------------

def _sign(perm):
    s = 1
    p = list(perm)
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                s = -s
    return s


def leibniz_det(m):
    n = len(m)
    total = ZERO
    for perm in permutations(range(n)):
        term = Expression.const(_sign(perm))
        for i, j in enumerate(perm):
            term = term * m[i][j]
            if term.is_zero():
                break
        total = total + term
    return total


def fields_from_file(p, path):
    with open(path) as fh:
        cands, funcs = parse_solution_file(fh.read(), p)
    return [candidate_field(p, c) for c in cands]


def rank_of_vectors(rows):
    """Rank of a list of Fraction lists by plain Gaussian elimination."""
    m = [[Fraction(x) for x in r] for r in rows]
    rank = 0
    cols = len(m[0]) if m else 0
    for c in range(cols):
        piv = next((i for i in range(rank, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][c] != 0:
                f = m[i][c] / m[rank][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[rank])]
        rank += 1
    return rank


def coefficient_vectors(fields):
    """Rows of monomial coefficients (component, monomial) for a list of point fields."""
    keys = []
    rows = []
    for f in fields:
        row = {}
        for ci, e in enumerate(f.components):
            assert e.den.is_const()
            for mono, c in e.num.iter_terms():
                k = (ci, mono)
                if k not in keys:
                    keys.append(k)
                row[k] = Fraction(c) / Fraction(e.den.const_value())
        rows.append(row)
    return [[r.get(k, 0) for k in keys] for r in rows]


def same_span(a, b) -> bool:
    ra = rank_of_vectors(coefficient_vectors(a))
    rb = rank_of_vectors(coefficient_vectors(b))
    rab = rank_of_vectors(coefficient_vectors(list(a) + list(b)))
    return ra == rb == rab


