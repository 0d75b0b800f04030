import pytest
from hypothesis import given, settings, strategies as st

from liesym.expr import ZERO, Expression
from liesym.noether import (
    NoetherError,
    euler_lagrange,
    euler_operator,
    noether_fluxes,
    variational_condition,
)
from liesym.problem import load_problem
from liesym.prolong import VectorField

from conftest import load, problem_path
from oracles import fields_from_file

KG = load("kleingordon.prob")
EMDEN = load("emden.prob")
# two independent variables, jet order 2 so that divergences of first-order fluxes fit
P2 = load_problem("jetorder = 2\nxvar = t, x\nuvar = u\nvariational = 1\nlagrangian = u_t*u_x\n")


def first_order(p):
    leaf = st.one_of(
        st.integers(-3, 3).map(Expression.const),
        st.sampled_from(["t", "x", "u", "u_t", "u_x"]).map(p.parse),
    )
    return st.recursive(
        leaf,
        lambda c: st.one_of(
            st.tuples(c, c).map(lambda ab: ab[0] + ab[1]),
            st.tuples(c, c).map(lambda ab: ab[0] * ab[1]),
            c.map(lambda a: Expression.apply("sin", a)),
        ),
        max_leaves=6,
    )


@settings(max_examples=100, deadline=None)
@given(first_order(P2), first_order(P2))
def test_euler_operator_annihilates_divergences(ft, fx):
    p = P2
    L = p.D(ft, 0) + p.D(fx, 1)
    assert euler_operator(L, 0, p).is_zero()


def test_euler_lagrange_of_klein_gordon():
    el = euler_lagrange(KG.lagrangian, KG)
    assert el.equations[0] == KG.parse("u_tx + df(h,u)")
    assert el.flipped == [False]


def test_euler_lagrange_orientation_flag():
    el = euler_lagrange(EMDEN.lagrangian, EMDEN)
    assert el.flipped == [True]
    assert el.equations[0] == EMDEN.parse("t^2*u_tt + 2*t*u_t + t^2*u^5")


def test_variational_condition():
    p = EMDEN
    good = VectorField((-Expression.symbol("t"), EMDEN.parse("u/2")), "variational", None, (Expression.const(1),))
    assert variational_condition(good, p.lagrangian, p).is_zero()
    bad = VectorField((Expression.const(0), EMDEN.parse("u")), "variational", None, (ZERO,))
    assert not variational_condition(bad, p.lagrangian, p).is_zero()
    with pytest.raises(NoetherError):
        noether_fluxes(bad, bad.phi, p.lagrangian, p)


def test_emden_flux():
    p = EMDEN
    (f,) = fields_from_file(p, problem_path("emden.sol"))
    law = noether_fluxes(f, f.phi, p.lagrangian, p)
    target = p.parse("t^2*(t*u^6 + 3*t*u_t^2 + 3*u*u_t)/6")
    assert (law.fluxes[0] / target).is_const()
    assert law.residual.is_zero()
    shifted = VectorField(f.components, f.flavor, None, (Expression.const(1),))
    assert noether_fluxes(shifted, shifted.phi, p.lagrangian, p).fluxes[0] == law.fluxes[0] - 1


def test_klein_gordon_fluxes():
    p = KG
    expected = [
        ("-u_x^2*x/2 + t*h", "t*u_t^2/2 - x*h"),
        ("h", "u_t^2/2"),
        ("u_x^2/2", "h"),
    ]
    for f, (a, b) in zip(fields_from_file(p, problem_path("kleingordon.sol")), expected):
        law = noether_fluxes(f, f.phi, p.lagrangian, p)
        assert law.fluxes == (p.parse(a), p.parse(b))
        assert law.residual.is_zero()


def test_second_order_lagrangian():
    p = load_problem("jetorder = 2\nxvar = x\nuvar = u\nvariational = 1\nlagrangian = u_xx^2/2\n")
    tr = VectorField((Expression.const(1), ZERO), "variational", None, (ZERO,))
    law = noether_fluxes(tr, tr.phi, p.lagrangian, p)
    assert law.residual.is_zero()
    assert not law.divergence.is_zero()


def test_third_order_lagrangian_rejected():
    p = load_problem("jetorder = 3\nxvar = x\nuvar = u\nvariational = 1\nlagrangian = u_xxx^2\n")
    tr = VectorField((Expression.const(1), ZERO), "variational", None, (ZERO,))
    with pytest.raises(NoetherError):
        noether_fluxes(tr, tr.phi, p.lagrangian, p)
