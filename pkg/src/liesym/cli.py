"""Command-line front end: staged subcommands over the symmetry pipeline."""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from . import report as R
from .algebra import (
    STANDARD_KINDS,
    AlgebraError,
    commutator_table,
    distribution,
    generate_standard_algebra,
    lie_bracket,
    minors,
    rank,
)
from .determining import (
    DeterminingError,
    DeterminingSystem,
    invariance_condition,
    solve_leading,
    split,
)
from .expr import ExpressionError
from .noether import NoetherError, euler_lagrange, noether_fluxes
from .problem import Problem, ProblemError, load_problem
from .prolong import VectorField, make_generic_generator, prolong
from .solver import (
    SolutionSet,
    SolverError,
    ansatz_solve,
    candidate_field,
    parse_rules,
    parse_solution_file,
    verify,
)

EXIT_OK, EXIT_ERROR, EXIT_RESIDUAL = 0, 1, 2

# numbered stages mapped onto subcommands
STAGES = {1: "init", 2: "invariance", 3: "determining", 4: "solve"}

_KNOWN_ERRORS = (ProblemError, ExpressionError, DeterminingError, SolverError, AlgebraError, NoetherError, OSError)


class StageError(Exception):
    def __init__(self, stage: str, message: str):
        super().__init__(message)
        self.stage = stage


@dataclass
class Session:
    """Lazily evaluated pipeline prefix for one problem."""

    args: argparse.Namespace
    report: Dict[str, Any] = field(default_factory=dict)
    problem: Optional[Problem] = None
    _generic: Optional[VectorField] = None
    _system: Optional[DeterminingSystem] = None
    _solution: Optional[SolutionSet] = None
    _funcs: Dict[str, Tuple[str, ...]] = field(default_factory=dict)

    def stage(self, name: str, fn, *a):
        try:
            return fn(*a)
        except StageError:
            raise
        except _KNOWN_ERRORS as exc:
            raise StageError(name, str(exc)) from None

    def load(self) -> Problem:
        if self.problem is None:
            text = self.stage("init", _read, self.args.problem)
            self.problem = self.stage("init", load_problem, text)
            self.report = R.new_report(self.args.command, self.problem)
        return self.problem

    def generic(self) -> VectorField:
        if self._generic is None:
            self._generic = self.stage("prolong", make_generic_generator, self.load())
        return self._generic

    def prolonged(self):
        return self.stage("prolong", prolong, self.generic(), self.load())

    def invariance(self):
        p = self.load()

        def run():
            man = solve_leading(p, self.generic())
            return man, invariance_condition(prolong(self.generic(), p), man, p)

        return self.stage("invariance", run)

    def system(self) -> DeterminingSystem:
        if self._system is None:
            _, conds = self.invariance()
            self._system = self.stage("determining", split, conds, self.load())
            self.report["determining"] = R.determining_section(self._system)
        return self._system

    def solution(self) -> SolutionSet:
        if self._solution is None:
            ds = self.system()
            self._solution = self.stage("solve", ansatz_solve, ds, self.args.degree)
            self.report["solution"] = R.solution_section(self._solution)
        return self._solution

    def candidates(self) -> Tuple[List[str], List[VectorField]]:
        p = self.load()

        def run():
            cands, funcs = parse_solution_file(_read(self.args.solution), p)
            self._funcs.update(funcs)
            return [c.name for c in cands], [candidate_field(p, c) for c in cands]

        return self.stage("verify", run)

    def rules(self, path: Optional[str], stage: str):
        if not path:
            return []
        return self.stage(stage, lambda: parse_rules(_read(path), self.load(), self._funcs))

    def generators(self) -> Tuple[str, List[VectorField]]:
        """Generator source for algebra commands: a solution file, a standard kind, or the solver."""
        p = self.load()
        if getattr(self.args, "solution", None):
            names, fields = self.candidates()
            return f"file {self.args.solution}", fields
        kind = getattr(self.args, "kind", None)
        if kind is None and not p.diffeqs and p.lagrangian is None:
            kind = "affine"
        if kind is not None:
            fields = self.stage("algebra", generate_standard_algebra, kind, p)
            return f"standard {kind}", fields
        return f"solve degree {self.args.degree}", list(self.solution().basis)


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


# ---------------------------------------------------------------------------
# commands

def cmd_init(S: Session) -> int:
    S.report["jet"] = R.jet_section(S.load())
    return EXIT_OK


def cmd_prolong(S: Session) -> int:
    p = S.load()
    S.report["generator"] = R.prolong_section(p, S.generic(), S.prolonged())
    return EXIT_OK


def cmd_invariance(S: Session) -> int:
    man, conds = S.invariance()
    S.report["invariance"] = R.invariance_section(man, conds)
    return EXIT_OK


def cmd_determining(S: Session) -> int:
    S.system()
    return EXIT_OK


def cmd_solve(S: Session) -> int:
    S.solution()
    return EXIT_OK


def cmd_verify(S: Session) -> int:
    if not S.args.solution:
        raise StageError("verify", "--solution is required")
    p = S.load()
    names, fields = S.candidates()
    rules = S.rules(S.args.constraints, "verify")
    ds = S.system()
    rep = S.stage("verify", verify, fields, ds, rules)
    S.report["verification"] = R.verification_section(rep, names)
    S.report["verification"]["fields"] = R.fields_section(p, fields)
    return EXIT_OK if rep.ok else EXIT_RESIDUAL


def _algebra_header(S: Session, source: str, fields: List[VectorField]) -> None:
    S.report["algebra"] = {"source": source, "count": len(fields), "generators": R.fields_section(S.load(), fields)}


def cmd_bracket(S: Session) -> int:
    p = S.load()
    source, fields = S.generators()
    _algebra_header(S, source, fields)
    n = len(fields)
    if S.args.pair:
        i, j = (k - 1 for k in S.args.pair)
        if not (0 <= i < n and 0 <= j < n):
            raise StageError("bracket", f"generator indices must lie in 1..{n}")
        pairs = [(i, j)]
    else:
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    out = [(i, j, S.stage("bracket", lie_bracket, fields[i], fields[j], p)) for i, j in pairs]
    S.report["brackets"] = R.bracket_section(p, out)
    return EXIT_OK


def cmd_table(S: Session) -> int:
    p = S.load()
    source, fields = S.generators()
    _algebra_header(S, source, fields)
    if not fields:
        raise StageError("table", "no generators")
    table = S.stage("table", commutator_table, fields, p)
    S.report["table"] = R.table_section(table)
    return EXIT_OK


def cmd_algebra(S: Session) -> int:
    p = S.load()
    fields = S.stage("algebra", generate_standard_algebra, S.args.kind, p)
    _algebra_header(S, f"standard {S.args.kind}", fields)
    return EXIT_OK


def _distribution(S: Session):
    p = S.load()
    source, fields = S.generators()
    S.report["algebra"] = {"source": source, "count": len(fields)}
    dist = S.stage("rank", distribution, fields, p)
    rules = S.rules(getattr(S.args, "substitute", None), "rank")
    if rules:
        dist = S.stage("rank", dist.substituted, rules, p)
    return dist, bool(rules)


def cmd_rank(S: Session) -> int:
    dist, subst = _distribution(S)
    r, piv = S.stage("rank", rank, dist)
    S.report["distribution"] = R.distribution_section(dist, r, piv)
    S.report["distribution"]["substituted"] = subst
    return EXIT_OK


def cmd_minors(S: Session) -> int:
    dist, subst = _distribution(S)
    found = S.stage("minors", minors, dist, S.args.order)
    S.report["minors"] = R.minors_section(S.args.order, found, subst)
    return EXIT_OK


def cmd_noether(S: Session) -> int:
    p = S.load()
    if p.mode != "variational" or p.lagrangian is None:
        raise StageError("noether", "the problem has no Lagrangian (set variational = 1 and lagrangian)")
    if S.args.solution:
        _, fields = S.candidates()
    else:
        fields = list(S.solution().basis)
    k = S.args.generator
    if not 1 <= k <= len(fields):
        raise StageError("noether", f"generator index {k} outside 1..{len(fields)}")
    vf = fields[k - 1]
    law = S.stage("noether", noether_fluxes, vf, vf.phi, p.lagrangian, p)
    el = S.stage("noether", euler_lagrange, p.lagrangian, p)
    S.report["noether"] = R.noether_section(p, law, el)
    return EXIT_OK if law.residual.is_zero() else EXIT_RESIDUAL


COMMANDS = {
    "init": cmd_init,
    "prolong": cmd_prolong,
    "invariance": cmd_invariance,
    "determining": cmd_determining,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "bracket": cmd_bracket,
    "table": cmd_table,
    "algebra": cmd_algebra,
    "rank": cmd_rank,
    "minors": cmd_minors,
    "noether": cmd_noether,
}


# ---------------------------------------------------------------------------
# argument handling

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="liesym", description="Lie symmetry computations on problem files.")
    parser.add_argument("--stage", type=int, choices=sorted(STAGES), help="run stage K (1 init, 2 invariance, 3 determining, 4 solve)")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def add(name: str, helptext: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--problem", required=True, help="problem file")
        sp.add_argument("--json", action="store_true", help="print the structured report only")
        sp.add_argument("--degree", type=int, default=2, help="ansatz degree (default 2)")
        return sp

    add("init", "validate the problem and list jet coordinates")
    add("prolong", "prolonged generic generator")
    add("invariance", "invariance conditions on the solution manifold")
    add("determining", "determining equations")
    add("solve", "polynomial ansatz solution of the determining system")
    sp = add("verify", "check candidate generators against the determining system")
    sp.add_argument("--solution", help="solution file with [generator NAME] sections")
    sp.add_argument("--constraints", help="rewrite rules applied before the zero test")
    for name, helptext in (("bracket", "Lie brackets of generators"), ("table", "commutator table")):
        sp = add(name, helptext)
        sp.add_argument("--solution")
        sp.add_argument("--kind", choices=STANDARD_KINDS)
        if name == "bracket":
            sp.add_argument("--pair", type=int, nargs=2, metavar=("I", "J"))
    sp = add("algebra", "standard Lie algebra of vector fields")
    sp.add_argument("--kind", choices=STANDARD_KINDS, default="affine")
    for name, helptext in (("rank", "rank of the prolonged distribution"), ("minors", "minors of the prolonged distribution")):
        sp = add(name, helptext)
        sp.add_argument("--solution")
        sp.add_argument("--kind", choices=STANDARD_KINDS)
        sp.add_argument("--substitute", help="rewrite rules applied to the distribution")
        if name == "minors":
            sp.add_argument("--order", type=int, required=True)
    sp = add("noether", "conservation law of a variational symmetry")
    sp.add_argument("--generator", type=int, required=True, help="1-based generator index")
    sp.add_argument("--solution")
    return parser


def _stage_argv(argv: List[str]) -> List[str]:
    """Rewrite a leading `--stage K` into the matching subcommand."""
    out = list(argv)
    for i, tok in enumerate(out):
        val = None
        if tok == "--stage" and i + 1 < len(out):
            val, span = out[i + 1], 2
        elif tok.startswith("--stage="):
            val, span = tok.split("=", 1)[1], 1
        if val is None:
            continue
        if any(t in COMMANDS for t in out):
            return argv
        try:
            name = STAGES[int(val)]
        except (ValueError, KeyError):
            return argv
        del out[i:i + span]
        return [name] + out
    return out


def run(argv: Sequence[str]) -> Tuple[int, Dict[str, Any]]:
    parser = build_parser()
    args = parser.parse_args(_stage_argv(list(argv)))
    if args.command is None:
        parser.error("a command or --stage is required")
    S = Session(args)
    try:
        S.load()
        code = COMMANDS[args.command](S)
    except StageError as exc:
        if not S.report:
            S.report = R.new_report(args.command, None)
        S.report["error"] = {"stage": exc.stage, "message": str(exc)}
        return EXIT_ERROR, S.report
    return code, S.report


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(_stage_argv(argv))
    code, rep = run(argv)
    if "error" in rep:
        err = rep["error"]
        print(f"liesym: {err['stage']}: {err['message']}", file=sys.stderr)
    sys.stdout.write(R.dumps(rep) if args.json else R.pretty(rep))
    return code


if __name__ == "__main__":
    sys.exit(main())
