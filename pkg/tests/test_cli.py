import json
import os
import subprocess
import sys

import pytest

from liesym import report as R
from liesym.cli import main, run

from conftest import PROBLEMS, load

GOLDEN = os.path.join(os.path.dirname(__file__), "golden")


def P(name):
    return os.path.join(PROBLEMS, name)


def cli(*args):
    code, rep = run(list(args))
    return code, rep


def test_solve_blasius():
    code, rep = cli("solve", "--problem", P("blasius.prob"), "--degree", "1")
    assert code == 0
    assert rep["determining"]["count"] == 9
    assert rep["solution"]["dimension"] == 2


def test_determining_is_identical_alone_and_inside_solve():
    _, alone = cli("determining", "--problem", P("heat.prob"))
    _, inside = cli("solve", "--problem", P("heat.prob"))
    a = json.dumps(alone["determining"], sort_keys=True)
    b = json.dumps(inside["determining"], sort_keys=True)
    assert a == b


def test_stage_alias():
    _, staged = cli("--stage", "3", "--problem", P("burgers.prob"))
    _, direct = cli("determining", "--problem", P("burgers.prob"))
    staged["command"] = direct["command"]
    assert staged == direct
    _, s4 = cli("--stage", "4", "--problem", P("burgers.prob"))
    assert s4["solution"]["dimension"] == 5


def test_exit_codes(capsys):
    assert cli("verify", "--problem", P("kdvb.prob"), "--solution", P("kdvb_gens.sol"))[0] == 0
    assert cli("verify", "--problem", P("heat.prob"), "--solution", P("heat_f1.sol"))[0] == 2
    code, rep = cli("verify", "--problem", P("heat.prob"), "--solution", P("heat_f1.sol"), "--constraints", P("heat_f1.con"))
    assert code == 0 and rep["verification"]["ok"]
    code, rep = cli("solve", "--problem", P("missing.prob"))
    assert code == 1 and rep["error"]["stage"] == "init"
    code, rep = cli("solve", "--problem", P("heat_nonclassical.prob"))
    assert code == 1 and rep["error"]["stage"] == "solve"
    code, rep = cli("noether", "--problem", P("heat.prob"), "--generator", "1")
    assert code == 1 and rep["error"]["stage"] == "noether"


def test_main_prints_json_and_text(capsys):
    assert main(["init", "--problem", P("heat.prob"), "--json"]) == 0
    rep = R.loads(capsys.readouterr().out)
    assert rep["jet"]["count"] == 8
    assert main(["init", "--problem", P("heat.prob")]) == 0
    out = capsys.readouterr().out
    assert "== jet" in out and "u_tx" in out


def test_errors_go_to_stderr(capsys):
    assert main(["solve", "--problem", P("missing.prob")]) == 1
    assert "init" in capsys.readouterr().err


def test_report_expressions_reparse():
    p = load("burgers.prob")
    _, rep = cli("solve", "--problem", P("burgers.prob"))
    for eq in rep["determining"]["equations"]:
        assert R.s(p.parse(eq)) == eq
    for g in rep["solution"]["generators"]:
        for v in g["components"].values():
            assert R.s(p.parse(v)) == v


def test_algebra_commands():
    code, rep = cli("table", "--problem", P("burgers.prob"), "--solution", P("burgers_gens.sol"))
    assert code == 0 and rep["table"]["closed"] and rep["table"]["antisymmetric"]
    assert rep["table"]["rows"][0][2] == "vf_2"
    code, rep = cli("bracket", "--problem", P("burgers.prob"), "--solution", P("burgers_gens.sol"), "--pair", "1", "3")
    assert rep["brackets"][0]["bracket"]["components"] == {"xi_t": "0", "xi_x": "1", "eta_u": "0"}
    code, rep = cli("algebra", "--problem", P("monge.prob"), "--kind", "projective")
    assert rep["algebra"]["count"] == 15
    code, rep = cli("rank", "--problem", P("monge.prob"))
    assert rep["algebra"]["source"] == "standard affine" and rep["distribution"]["rank"] == 8
    code, rep = cli("table", "--problem", P("burgers.prob"))
    assert rep["algebra"]["source"].startswith("solve") and rep["table"]["closed"]


def test_noether_command():
    code, rep = cli("noether", "--problem", P("kleingordon.prob"), "--generator", "2", "--solution", P("kleingordon.sol"))
    assert code == 0
    assert rep["noether"]["fluxes"] == {"t": "h", "x": "u_t^2/2"}
    assert rep["noether"]["on_shell_residual"] == "0"


def test_console_script_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "liesym.cli", "init", "--problem", P("blasius.prob"), "--json"],
        capture_output=True, text=True, check=True,
    )
    assert R.loads(out.stdout)["problem"]["xvar"] == ["x"]


GOLDEN_CASES = {
    "blasius_solve.json": ["solve", "--problem", "blasius.prob", "--degree", "1"],
    "burgers_table.json": ["table", "--problem", "burgers.prob", "--solution", "burgers_gens.sol"],
    "kdvb_verify.json": ["verify", "--problem", "kdvb.prob", "--solution", "kdvb_gens.sol"],
    "emden_noether.json": ["noether", "--problem", "emden.prob", "--generator", "1", "--solution", "emden.sol"],
    "heat_nonclassical_determining.json": ["determining", "--problem", "heat_nonclassical.prob"],
}


def _golden_args(args):
    return [P(a) if a.endswith((".prob", ".sol", ".con", ".sub")) else a for a in args]


def _portable(rep):
    # paths differ between checkouts; keep only the file name
    alg = rep.get("algebra")
    if alg and alg.get("source", "").startswith("file "):
        alg["source"] = "file " + os.path.basename(alg["source"][5:])
    return rep


@pytest.mark.parametrize("name", sorted(GOLDEN_CASES))
def test_golden_reports(name):
    _, rep = cli(*_golden_args(GOLDEN_CASES[name]))
    text = R.dumps(_portable(rep))
    path = os.path.join(GOLDEN, name)
    if os.environ.get("LIESYM_REGEN_GOLDEN"):
        with open(path, "w") as fh:
            fh.write(text)
    with open(path) as fh:
        golden = fh.read()
    assert text == golden
    # serialize -> parse -> serialize is a fixpoint
    assert R.dumps(R.loads(golden)) == golden
    assert R.pretty(R.loads(golden)) == R.pretty(rep)
