import pytest
from hypothesis import given, settings, strategies as st

from liesym.determining import (
    DeterminingError,
    Manifold,
    determining_system,
    run_pipeline,
    solve_leading,
    solve_linear,
)
from liesym.expr import ZERO, Expression, NotPolynomialError, collect_coefficients
from liesym.problem import load_problem

from conftest import load

HEAT = load("heat.prob")


def test_solve_linear():
    p = HEAT
    atom = p.parse("u_t").as_atom()
    assert solve_linear(p.parse("2*u_t - u_xx"), atom) == p.parse("u_xx/2")
    with pytest.raises(ValueError):
        solve_linear(p.parse("u_t^2 - u_xx"), atom)


def test_manifold_closure_and_cycles():
    p = HEAT
    a, b = p.parse("u_t").as_atom(), p.parse("u_tx").as_atom()
    m = Manifold()
    m.add(a, p.parse("u_xx"))
    m.add(b, p.parse("u_t + u"))
    m.close()
    assert m.rules[b] == p.parse("u_xx + u")
    with pytest.raises(DeterminingError):
        m.add(a, ZERO)
    cyc = Manifold({a: p.parse("u_tx"), b: p.parse("u_t")})
    with pytest.raises(DeterminingError):
        cyc.close()


def test_leading_manifold_of_heat():
    assert solve_leading(HEAT).as_strings() == [("u_t", "u_xx")]


def test_conditional_manifold_adds_surface_condition():
    m = dict(solve_leading(load("heat_nonclassical.prob")).as_strings())
    assert "u_xx" in m and "u_t" in m


def test_blasius_system_is_linear_with_nine_equations():
    ds = determining_system(load("blasius.prob"))
    assert len(ds) == 9 and ds.linear
    assert ds.split_variables == ("u_x", "u_xx")


def test_heat_system():
    ds = determining_system(HEAT)
    assert ds.linear and len(ds) > 0
    assert set(ds.unknowns) == {"xi_t", "xi_x", "eta_u"}


def test_nonclassical_system_is_flagged_nonlinear():
    ds = determining_system(load("heat_nonclassical.prob"))
    assert not ds.linear
    assert "xi_t" not in ds.unknowns


def test_approximate_system_records_epsilon_orders():
    ds = determining_system(load("kdvb.prob"))
    assert set(ds.by_order()) == {0, 1}
    assert len(ds.eps_orders) == len(ds.equations)


def test_nonpolynomial_dependence_requires_declaration():
    ok = determining_system(load("nonpoly.prob"))
    assert "exp(u_x)" in ok.split_variables
    bad = load_problem("jetorder = 2\nxvar = t, x\nuvar = u\ndiffeqs = u_tx + exp(u_x) - u\nleadders = u_tx\n")
    with pytest.raises(NotPolynomialError):
        determining_system(bad)


def test_pipeline_prefix_is_deterministic():
    a = run_pipeline(load("burgers.prob")).system.lines()
    b = run_pipeline(load("burgers.prob")).system.lines()
    assert a == b


def test_equations_are_primitive_with_positive_lead():
    for eq in determining_system(HEAT).equations:
        assert eq.num.content() == 1
        assert eq.num.leading()[1] > 0


# split reconstruction: sum of monomial * coefficient gives back the polynomial
SPLIT = ("u_x", "u_xx", "u_tx")
COEF = ("t", "x", "u", "df(xi_t,x)", "df(eta_u,u)", "eta_u")


def split_polys():
    leaf = st.one_of(
        st.integers(-4, 4).map(Expression.const),
        st.sampled_from(SPLIT + COEF).map(HEAT.parse),
    )
    return st.recursive(
        leaf,
        lambda c: st.one_of(st.tuples(c, c).map(lambda ab: ab[0] + ab[1]), st.tuples(c, c).map(lambda ab: ab[0] * ab[1])),
        max_leaves=10,
    )


@settings(max_examples=100, deadline=None)
@given(split_polys())
def test_split_reconstruction(e):
    parts = collect_coefficients(e, SPLIT)
    total = ZERO
    for mono, coeff in parts:
        assert not (coeff.all_atoms() & {HEAT.parse(s).as_atom() for s in SPLIT})
        total = total + mono * coeff
    assert total == e
    assert len({m for m, _ in parts}) == len(parts)
