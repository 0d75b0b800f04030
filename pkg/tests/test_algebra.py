
import pytest
from hypothesis import given, settings, strategies as st

from liesym.algebra import (
    AlgebraError,
    commutator_table,
    derived_series,
    distribution,
    expand_in,
    generate_standard_algebra,
    is_abelian,
    is_solvable,
    lie_bracket,
    minors,
    rank,
)
from liesym.expr import Expression
from liesym.linalg import expression_det
from liesym.prolong import VectorField
from liesym.solver import parse_rules

from conftest import load, problem_path
from oracles import bracket_by_action, fields_from_file, leibniz_det

HEAT = load("heat.prob")
COORDS = ["t", "x", "u"]
T, X, U = (Expression.symbol(s) for s in COORDS)


def comps(max_deg=2):
    mono = st.tuples(st.integers(0, max_deg), st.integers(0, max_deg), st.integers(0, max_deg)).filter(lambda e: sum(e) <= max_deg)
    term = st.tuples(st.integers(-3, 3), mono).map(lambda cm: Expression.const(cm[0]) * T ** cm[1][0] * X ** cm[1][1] * U ** cm[1][2])
    return st.lists(term, max_size=3).map(lambda ts: sum(ts, Expression.const(0)))


fields = st.tuples(comps(), comps(), comps()).map(lambda c: VectorField(c))


@settings(max_examples=100, deadline=None)
@given(fields, fields, fields)
def test_jacobi_identity(a, b, c):
    p = HEAT
    br = lambda f, g: lie_bracket(f, g, p)  # noqa: E731
    total = br(a, br(b, c)) + br(b, br(c, a)) + br(c, br(a, b))
    assert total.is_zero()


@settings(max_examples=50, deadline=None)
@given(fields, fields)
def test_bracket_matches_action_oracle(a, b):
    assert list(lie_bracket(a, b, HEAT).components) == bracket_by_action(a.components, b.components, COORDS)


def burgers_fields():
    p = load("burgers.prob")
    return p, fields_from_file(p, problem_path("burgers_gens.sol"))


def test_burgers_table():
    p, fs = burgers_fields()
    table = commutator_table(fs, p)
    assert table.closed and table.is_antisymmetric()
    assert table.entries[0][2].coefficients == [0, 1, 0, 0, 0]
    rendered = table.render()
    assert rendered[0][2] == "vf_2" and rendered[2][0] == "-vf_2"
    assert all(rendered[i][i] == "0" for i in range(5))


def test_table_outside_span():
    p = HEAT
    table = commutator_table([VectorField((Expression.const(1), X * 0, X * 0)), VectorField((T * T, X * 0, X * 0))], p)
    assert not table.closed
    assert "outside span" in table.render()[0]


def test_expand_in():
    a, b = VectorField((T, X, U)), VectorField((Expression.const(1), X * 0, U))
    assert expand_in(a.scale(3) - b, [a, b]) == [3, -1]
    assert expand_in(VectorField((U, X * 0, X * 0)), [a, b]) is None


def test_structure_queries():
    p, fs = burgers_fields()
    assert not is_abelian(fs, p)
    series = derived_series(fs, p)
    assert series[0] == 5
    translations = fs[:2]
    assert is_abelian(translations, p) and is_solvable(translations, p)


def test_bracket_flavor_checks():
    a = VectorField((T, X, U), "point")
    b = VectorField((T, X, U), "conditional")
    with pytest.raises(AlgebraError):
        lie_bracket(a, b, HEAT)


def test_standard_algebra_sizes():
    p = load("monge.prob")
    assert len(generate_standard_algebra("isometry", p)) == 6
    assert len(generate_standard_algebra("affine", p)) == 12
    assert len(generate_standard_algebra("projective", p)) == 15
    with pytest.raises(AlgebraError):
        generate_standard_algebra("conformal", p)


def test_standard_algebras_close():
    p = load("monge.prob")
    for kind in ("isometry", "affine", "projective"):
        assert commutator_table(generate_standard_algebra(kind, p), p).closed, kind


def test_monge_distribution_rank():
    p = load("monge.prob")
    dist = distribution(generate_standard_algebra("affine", p), p)
    assert len(dist.columns) == 8
    assert rank(dist)[0] == 8
    with open(problem_path("monge_onshell.sub")) as fh:
        rules = parse_rules(fh.read(), p)
    assert rank(dist.substituted(rules, p))[0] == 7


def test_minors_match_leibniz_determinant():
    p = load("monge.prob")
    dist = distribution(generate_standard_algebra("affine", p), p)
    found = minors(dist, 3, cap=10 ** 6)
    for rs, cs, det in found[::97]:
        sub = [[dist.rows[r][c] for c in cs] for r in rs]
        assert det == leibniz_det(sub)


def test_minor_cap():
    p = load("monge.prob")
    dist = distribution(generate_standard_algebra("affine", p), p)
    with pytest.raises(AlgebraError, match="cap"):
        minors(dist, 6, cap=100)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.lists(st.lists(comps(1), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_determinant_oracle(m):
    assert expression_det(m) == leibniz_det(m)
