#!/usr/bin/env python3
"""Run every worked example through the command-line interface.

Prints one summary line per example. With ``--out DIR`` each JSON report is
also written to ``DIR/<name>.json``.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple

from liesym.cli import run
from liesym.report import dumps

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
PROBLEMS = os.path.join(ROOT, "problems")


def P(name: str) -> str:
    return os.path.join(PROBLEMS, name)


@dataclass
class Example:
    name: str
    argv: List[str]
    summary: Callable[[Dict], str]


def _det(r):
    d = r["determining"]
    return f"{d['count']} equations, linear={d['linear']}"


def _sol(r):
    s = r["solution"]
    extra = f", families {len(s['families'])}" if s["families"] else ""
    return f"dimension {s['dimension']} (matrix {s['matrix'][0]}x{s['matrix'][1]}){extra}"


def _ver(r):
    v = r["verification"]
    return f"{len(v['generators'])} generators, {v['checked']} checks, residuals {len(v['residuals'])}"


def _noe(r):
    n = r["noether"]
    fl = ", ".join(f"{k}: {v}" for k, v in sorted(n["fluxes"].items()))
    return f"{fl}; on shell {n['on_shell_residual']}"


EXAMPLES = [
    Example("blasius_determining", ["determining", "--problem", P("blasius.prob")], _det),
    Example("blasius_solve", ["solve", "--problem", P("blasius.prob"), "--degree", "1"], _sol),
    Example("heat_solve", ["solve", "--problem", P("heat.prob")], _sol),
    Example("heat_verify", ["verify", "--problem", P("heat.prob"), "--solution", P("heat_gens.sol")], _ver),
    Example(
        "heat_superposition",
        ["verify", "--problem", P("heat.prob"), "--solution", P("heat_f1.sol"), "--constraints", P("heat_f1.con")],
        _ver,
    ),
    Example("heat_nonclassical", ["determining", "--problem", P("heat_nonclassical.prob")], _det),
    Example("burgers_solve", ["solve", "--problem", P("burgers.prob")], _sol),
    Example(
        "burgers_table",
        ["table", "--problem", P("burgers.prob"), "--solution", P("burgers_gens.sol")],
        lambda r: f"closed={r['table']['closed']}, antisymmetric={r['table']['antisymmetric']}",
    ),
    Example(
        "burgers_nonclassical",
        ["verify", "--problem", P("burgers_nonclassical.prob"), "--solution", P("burgers_nc.sol")],
        _ver,
    ),
    Example("kdv_solve", ["solve", "--problem", P("kdv.prob")], _sol),
    Example("kdvb_solve", ["solve", "--problem", P("kdvb.prob")], _sol),
    Example("kdvb_verify", ["verify", "--problem", P("kdvb.prob"), "--solution", P("kdvb_gens.sol")], _ver),
    Example("contact_solve", ["solve", "--problem", P("contact.prob")], _sol),
    Example("contact_verify", ["verify", "--problem", P("contact.prob"), "--solution", P("contact.sol")], _ver),
    Example(
        "monge_rank",
        ["rank", "--problem", P("monge.prob"), "--kind", "affine"],
        lambda r: f"rank {r['distribution']['rank']}",
    ),
    Example(
        "monge_rank_on_shell",
        ["rank", "--problem", P("monge.prob"), "--kind", "affine", "--substitute", P("monge_onshell.sub")],
        lambda r: f"rank {r['distribution']['rank']}",
    ),
    Example(
        "monge_minors",
        ["minors", "--problem", P("monge.prob"), "--kind", "affine", "--substitute", P("monge_onshell.sub"), "--order", "8"],
        lambda r: f"{r['minors']['total']} minors, all zero={r['minors']['all_zero']}",
    ),
    Example("emden_verify", ["verify", "--problem", P("emden.prob"), "--solution", P("emden.sol")], _ver),
    Example("emden_noether", ["noether", "--problem", P("emden.prob"), "--solution", P("emden.sol"), "--generator", "1"], _noe),
    Example("kleingordon_verify", ["verify", "--problem", P("kleingordon.prob"), "--solution", P("kleingordon.sol")], _ver),
]
EXAMPLES += [
    Example(
        f"kleingordon_noether_{i}",
        ["noether", "--problem", P("kleingordon.prob"), "--solution", P("kleingordon.sol"), "--generator", str(i)],
        _noe,
    )
    for i in (1, 2, 3)
]
EXAMPLES.append(
    Example("wave_equivalence", ["verify", "--problem", P("wave_equiv.prob"), "--solution", P("wave_equiv.sol")], _ver)
)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", help="directory for JSON reports")
    ap.add_argument("names", nargs="*", help="run only these examples")
    args = ap.parse_args(argv)
    chosen = [e for e in EXAMPLES if not args.names or e.name in args.names]
    if args.out:
        os.makedirs(args.out, exist_ok=True)
    bad: List[Tuple[str, int]] = []
    for ex in chosen:
        t0 = time.perf_counter()
        code, rep = run(ex.argv)
        dt = time.perf_counter() - t0
        info = rep["error"]["message"] if "error" in rep else ex.summary(rep)
        print(f"{ex.name:28s} exit {code}  {dt:6.2f}s  {info}")
        if code:
            bad.append((ex.name, code))
        if args.out:
            with open(os.path.join(args.out, ex.name + ".json"), "w") as fh:
                fh.write(dumps(rep))
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
