import pytest

from liesym.problem import ProblemError, build_jet, jet_count, load_problem

from conftest import load

BASE = "jetorder = 2\nxvar = t, x\nuvar = u\n"


def test_heat_loads():
    p = load("heat.prob")
    assert p.mode == "point" and p.n == 2 and p.m == 1
    assert [p.jet_name(v) for v in build_jet(p)] == ["u", "u_t", "u_x", "u_tt", "u_tx", "u_xx"]
    assert jet_count(2, 1, 2) == 3  # derivatives of order exactly 2


def test_mixed_derivative_spellings_agree():
    p = load("heat.prob")
    assert p.parse("u_xt") == p.parse("u_tx")


@pytest.mark.parametrize(
    "text, message",
    [
        ("xvar = x\nuvar = u\n", "jetorder"),
        (BASE + "bogus = 1\n", "unknown key"),
        (BASE + "diffeqs = u_xx\nleadders = u_x, u_xx\n", "entries"),
        ("jetorder = 1\nxvar = x\nuvar = u\ndiffeqs = u_xx\nleadders = u_xx\n", "jetorder"),
        ("jetorder = 2\nxvar = x\nuvar = x\n", "collision"),
    ],
)
def test_invalid_problems(text, message):
    with pytest.raises(ProblemError, match=message):
        load_problem(text)


def test_missing_equations_only_warn():
    p = load_problem(BASE)
    assert p.warnings


def test_modes():
    assert load("contact.prob").mode == "contact"
    assert load("emden.prob").mode == "variational"
    assert load("wave_equiv.prob").mode == "equivalence"
    assert load("heat_nonclassical.prob").mode == "conditional"
    kdvb = load("kdvb.prob")
    assert kdvb.approximate and kdvb.approxorder == 1


def test_arbitrary_element_tokens():
    p = load("wave_equiv.prob")
    assert "f" in str(p.parse("f_u_t"))
