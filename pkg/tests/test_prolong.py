from hypothesis import given, settings, strategies as st

from liesym.expr import ZERO, Expression, diff_partial, substitute
from liesym.problem import JetVariable, build_jet
from liesym.prolong import (
    VectorField,
    contact_components,
    make_generic_generator,
    prolong,
    prolong_contact,
    prolong_point,
    recursion_operator,
)

from conftest import load
from oracles import jet_values

HEAT = load("heat.prob")
T, X, U = (Expression.symbol(s) for s in ("t", "x", "u"))
JET1 = ["u", "u_t", "u_x", "u_tt", "u_tx", "u_xx"]


def jet_polys(p, names, max_leaves=6):
    leaf = st.one_of(
        st.integers(-3, 3).map(Expression.const),
        st.sampled_from(list(p.xvar) + names).map(lambda n: p.parse(n)),
    )

    def extend(c):
        return st.one_of(
            st.tuples(c, c).map(lambda ab: ab[0] + ab[1]),
            st.tuples(c, c).map(lambda ab: ab[0] * ab[1]),
            c.map(lambda a: Expression.apply("exp", a)),
            c.map(lambda a: a / (a * a + 1)),
        )

    return st.recursive(leaf, extend, max_leaves=max_leaves)


@settings(max_examples=200, deadline=None)
@given(jet_polys(HEAT, JET1))
def test_total_derivatives_commute(e):
    p = HEAT
    assert p.D(p.D(e, 0), 1) == p.D(p.D(e, 1), 0)


SOLUTION = T ** 2 * X + Expression.apply("exp", X) * T  # any smooth function will do


@settings(max_examples=60, deadline=None)
@given(jet_polys(HEAT, JET1, max_leaves=4), st.integers(0, 1))
def test_total_derivative_along_a_function(e, i):
    p = HEAT
    table = jet_values(p, SOLUTION)
    lhs = substitute(p.D(e, i), table)
    rhs = diff_partial(substitute(e, table), p.xvar[i])
    assert lhs == rhs


def test_total_derivative_of_jet_symbols():
    p = HEAT
    assert p.D(p.parse("u_x"), 0) == p.parse("u_tx")
    assert p.D(p.parse("t*u"), 0) == p.parse("u + t*u_t")


def _characteristic_prolongation(p, vf, v: JetVariable):
    """eta^J = D_J(Q) + sum_i xi_i u_{J,i} with Q = eta - sum_i xi_i u_i."""
    xi = vf.components[: p.n]
    Q = vf.components[p.n + v.dep]
    for i in range(p.n):
        Q = Q - xi[i] * p.jet_symbol(JetVariable(v.dep, (i,)))
    out = Q
    for i in v.index:
        out = p.D(out, i)
    for i in range(p.n):
        out = out + xi[i] * p.jet_symbol(JetVariable(v.dep, tuple(sorted(v.index + (i,)))))
    return out


def test_prolongation_matches_characteristic_form():
    p = HEAT
    vf = make_generic_generator(p)
    pf = prolong_point(vf, p)
    for v in build_jet(p):
        assert pf.eta[v] == _characteristic_prolongation(p, vf, v), p.jet_name(v)


def test_prolongation_of_scaling():
    p = HEAT
    vf = VectorField((2 * T, X, ZERO))
    pf = prolong_point(vf, p)
    by = pf.by_name(p)
    assert by["u_t"] == p.parse("-2*u_t")
    assert by["u_xx"] == p.parse("-2*u_xx")
    assert by["u_tx"] == p.parse("-3*u_tx")


def test_contact_components_from_omega():
    p = load("contact.prob")
    omega = p.parse("-u_x^2/2")
    xi, eta = contact_components(omega, p)
    assert xi[0] == p.parse("u_x")
    assert eta == p.parse("u_x^2/2")
    pf = prolong_contact(omega, p)
    assert pf.by_name(p)["u_x"].is_zero()


def test_generic_generators_by_mode():
    assert make_generic_generator(HEAT).flavor == "point"
    nc = make_generic_generator(load("heat_nonclassical.prob"))
    assert nc.components[0] == Expression.const(1)
    eq = make_generic_generator(load("wave_equiv.prob"))
    assert eq.flavor == "equivalence" and len(eq.components) == 5
    var = make_generic_generator(load("emden.prob"))
    assert len(var.phi) == 1


def test_approximate_generator_uses_recursion_operator():
    p = load("kdvb.prob")
    vf = make_generic_generator(p)
    text = str(vf.components[0])
    assert "xi0_t" in text and "xi1_t" in text and "epsilon" in text
    assert recursion_operator(p, p.parse("u0")) == p.parse("u1")
    assert recursion_operator(p, p.parse("u1")).is_zero()


def test_equivalence_prolongation_has_mu_terms():
    p = load("wave_equiv.prob")
    pf = prolong(make_generic_generator(p), p)
    assert pf.mu
    assert all(not c.is_zero() for c in pf.mu.values())
