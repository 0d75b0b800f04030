import pytest

from liesym.determining import determining_system
from liesym.expr import Expression
from liesym.problem import load_problem
from liesym.prolong import VectorField
from liesym.solver import (
    SolverError,
    ansatz_solve,
    apply_rules,
    essential_generators,
    is_proper_contact,
    parse_rules,
    parse_solution_file,
    span_rank,
    verify,
)

from conftest import load, problem_path
from oracles import fields_from_file, same_span

T, X, U = (Expression.symbol(s) for s in ("t", "x", "u"))
ZERO = Expression.const(0)
ONE = Expression.const(1)


def vf(*comps):
    return VectorField(tuple(c if isinstance(c, Expression) else Expression.const(c) for c in comps))


def test_blasius_degree_one():
    p = load("blasius.prob")
    sol = ansatz_solve(determining_system(p), degree=1)
    assert len(sol) == 2
    assert same_span(sol.basis, [vf(X, -U), vf(1, 0)])
    assert sol.parameters == ["k_1", "k_2"]


def test_heat_finite_part_and_family():
    p = load("heat.prob")
    sol = ansatz_solve(determining_system(p), degree=2)
    assert len(sol) == 6
    assert same_span(sol.basis, fields_from_file(p, problem_path("heat_gens.sol")))
    assert sol.families and "df(f,t) - df(f,x,2)" in sol.families[0]


def test_basis_is_stable_across_degrees():
    p = load("burgers.prob")
    ds = determining_system(p)
    b2, b3 = ansatz_solve(ds, 2).basis, ansatz_solve(ds, 3).basis
    assert len(b2) == len(b3) == 5
    assert same_span(b2, b3)


def test_nonlinear_system_is_rejected():
    with pytest.raises(SolverError):
        ansatz_solve(determining_system(load("heat_nonclassical.prob")))


def test_monomial_cap():
    with pytest.raises(SolverError, match="cap"):
        ansatz_solve(determining_system(load("heat.prob")), degree=3, cap=10)


def test_unpinned_free_parameter():
    text = "jetorder = 2\nxvar = t, x\nuvar = u\nfreepars = a\ndiffeqs = u_t - a*u_xx\nleadders = u_t\n"
    with pytest.raises(SolverError, match="assume"):
        ansatz_solve(determining_system(load_problem(text)))


def test_verify_detects_wrong_generator():
    p = load("burgers.prob")
    ds = determining_system(p)
    good = verify([vf(1, 0, 0)], ds)
    bad = verify([vf(0, 0, U)], ds)
    assert good.ok and not bad.ok
    assert bad.residuals[0].field_index == 0


def test_verify_with_constraint_rules():
    p = load("heat.prob")
    ds = determining_system(p)
    with open(problem_path("heat_f1.sol")) as fh:
        cands, funcs = parse_solution_file(fh.read(), p)
    fields = fields_from_file(p, problem_path("heat_f1.sol"))
    assert not verify(fields, ds).ok
    with open(problem_path("heat_f1.con")) as fh:
        rules = parse_rules(fh.read(), p, funcs)
    assert verify(fields, ds, rules).ok


def test_rules_rewrite_derivatives_of_lhs():
    p = load("heat.prob")
    rules = parse_rules("depend g = t, x\ndf(g,t) -> df(g,x,2)\n", p)
    e = p.parse("df(g,t,x)", {"g": ("t", "x")})
    assert apply_rules(e, rules, p) == p.parse("df(g,x,3)", {"g": ("t", "x")})


def test_solution_file_errors():
    p = load("heat.prob")
    with pytest.raises(SolverError):
        parse_solution_file("xi_t = 1\n", p)
    with pytest.raises(SolverError):
        parse_solution_file("[generator a]\nxi_t = 1\nxi_t = 2\n", p)


def test_contact_solution_and_proper_flags():
    p = load("contact.prob")
    sol = ansatz_solve(determining_system(p), degree=2)
    assert len(sol) == 10
    assert sum(is_proper_contact(p, f) for f in sol.basis) == 3
    listed = fields_from_file(p, problem_path("contact.sol"))
    assert verify(listed, determining_system(p)).ok
    assert [is_proper_contact(p, f) for f in listed].count(True) == 3


def test_essential_generators_certificates():
    a, b = vf(1, 0, 0), vf(0, 1, 0)
    kept, cert = essential_generators([a, b, a + b.scale(2)])
    assert kept == [0, 1]
    assert cert == {2: [(0, 1), (1, 2)]}
    assert span_rank([a, b, a + b]) == 2


def test_kdvb_degree_one_and_two_agree():
    p = load("kdvb.prob")
    ds = determining_system(p)
    assert len(ansatz_solve(ds, 1)) == len(ansatz_solve(ds, 2)) == 7


def test_instantiate_parameters():
    p = load("heat.prob")
    ds = determining_system(p)
    sol = ansatz_solve(ds, 2)
    combo = sol.instantiate({1: 2, 3: Expression.const(-1)})
    assert combo == sol.basis[0].scale(2) + sol.basis[2].scale(-1)
    assert verify([combo], ds).ok
    assert sol.instantiate({}).is_zero()
    with pytest.raises(SolverError):
        sol.instantiate({7: 1})
