"""Structured reports: section builders, JSON serialization and text rendering."""

from __future__ import annotations

import json
from typing import Any, Dict, List, Optional, Sequence

from .algebra import CommutatorTable, Distribution
from .determining import DeterminingSystem, Manifold
from .expr import Expression, to_string
from .noether import ConservationLaw, EulerLagrange
from .problem import Problem, build_jet
from .prolong import ProlongedField, VectorField, component_labels
from .solver import SolutionSet, VerificationReport, is_proper_contact

SCHEMA_VERSION = 1


def s(e: Expression) -> str:
    return to_string(e)


def new_report(command: str, p: Optional[Problem]) -> Dict[str, Any]:
    rep: Dict[str, Any] = {"schema": SCHEMA_VERSION, "command": command}
    if p is not None:
        rep["problem"] = problem_section(p)
    return rep


def dumps(report: Dict[str, Any]) -> str:
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def loads(text: str) -> Dict[str, Any]:
    rep = json.loads(text)
    if not isinstance(rep, dict) or rep.get("schema") != SCHEMA_VERSION:
        raise ValueError(f"unsupported report schema {rep.get('schema') if isinstance(rep, dict) else None!r}")
    return rep


# ---------------------------------------------------------------------------
# sections

def problem_section(p: Problem) -> Dict[str, Any]:
    out: Dict[str, Any] = {
        "mode": p.mode,
        "jetorder": p.jetorder,
        "xvar": list(p.xvar),
        "uvar": list(p.uvar),
        "diffeqs": [s(e) for e in p.diffeqs],
        "leadders": [a[1] for a in p.leadders],
        "approxorder": p.approxorder,
    }
    if p.arbelem:
        out["arbelem"] = list(p.arbelem)
    if p.lagrangian is not None:
        out["lagrangian"] = s(p.lagrangian)
    if p.warnings:
        out["warnings"] = list(p.warnings)
    return out


def jet_section(p: Problem) -> Dict[str, Any]:
    jets = [p.jet_name(v) for v in build_jet(p)]
    return {"independent": list(p.xvar), "jet": jets, "count": len(p.xvar) + len(jets)}


def generator_section(p: Problem, vf: VectorField) -> Dict[str, Any]:
    labels = component_labels(p)
    out: Dict[str, Any] = {"flavor": vf.flavor, "components": {lab: s(c) for lab, c in zip(labels, vf.components)}}
    if vf.omega is not None:
        out["omega"] = s(vf.omega)
    if vf.phi:
        out["phi"] = {f"phi_{x}": s(c) for x, c in zip(p.xvar, vf.phi)}
    return out


def prolong_section(p: Problem, vf: VectorField, pf: ProlongedField) -> Dict[str, Any]:
    out = generator_section(p, vf)
    coeffs = {x: s(c) for x, c in zip(p.xvar, pf.xi)}
    for v, c in pf.eta.items():
        coeffs[p.jet_name(v)] = s(c)
    out["prolongation"] = coeffs
    if pf.mu:
        out["mu"] = {to_string(Expression.from_atom(a)): s(c) for a, c in pf.mu.items()}
    return out


def invariance_section(man: Manifold, conds: Sequence[Expression]) -> Dict[str, Any]:
    return {"manifold": {a: b for a, b in man.as_strings()}, "conditions": [s(c) for c in conds]}


def determining_section(ds: DeterminingSystem) -> Dict[str, Any]:
    out: Dict[str, Any] = {
        "count": len(ds.equations),
        "equations": ds.lines(),
        "linear": ds.linear,
        "unknowns": {k: list(v) for k, v in ds.unknowns.items()},
        "split_variables": list(ds.split_variables),
    }
    if ds.eps_orders is not None:
        out["eps_orders"] = list(ds.eps_orders)
    if ds.nonvanishing:
        out["nonvanishing"] = [s(e) for e in ds.nonvanishing]
    return out


def fields_section(p: Problem, fields: Sequence[VectorField]) -> List[Dict[str, Any]]:
    return [generator_section(p, f) for f in fields]


def solution_section(sol: SolutionSet) -> Dict[str, Any]:
    p = sol.problem
    gens = []
    for vf, vals in zip(sol.basis, sol.kernel_values):
        g = generator_section(p, vf)
        g["kernels"] = {k: s(v) for k, v in sorted(vals.items())}
        if p.mode == "contact":
            g["proper_contact"] = is_proper_contact(p, vf)
        gens.append(g)
    return {
        "degree": sol.degree,
        "monomials": sol.monomials,
        "matrix": list(sol.matrix_shape),
        "nullity": sol.nullity,
        "dimension": len(sol.basis),
        "parameters": list(sol.parameters),
        "generators": gens,
        "general": {k: s(v) for k, v in sol.general_solution().items()},
        "families": list(sol.families),
        "nonvanishing": [s(e) for e in sol.nonvanishing],
    }


def verification_section(rep: VerificationReport, names: Sequence[str]) -> Dict[str, Any]:
    res = []
    for r in rep.residuals:
        item: Dict[str, Any] = {"generator": names[r.field_index], "equation": r.equation_index + 1, "residual": s(r.residual)}
        if r.eps_order is not None:
            item["eps_order"] = r.eps_order
        res.append(item)
    return {"generators": list(names), "checked": rep.checked, "ok": rep.ok, "residuals": res}


def bracket_section(p: Problem, pairs: Sequence[tuple]) -> List[Dict[str, Any]]:
    return [{"pair": [i + 1, j + 1], "bracket": generator_section(p, br)} for i, j, br in pairs]


def table_section(table: CommutatorTable) -> Dict[str, Any]:
    return {
        "size": table.size,
        "closed": table.closed,
        "antisymmetric": table.is_antisymmetric(),
        "rows": table.render(),
    }


def distribution_section(dist: Distribution, rank: int, pivots) -> Dict[str, Any]:
    return {
        "columns": list(dist.columns),
        "rows": [[s(e) for e in row] for row in dist.rows],
        "rank": rank,
        "pivots": [list(pv) for pv in pivots],
    }


def minors_section(order: int, found, substituted: bool) -> Dict[str, Any]:
    nonzero = [{"rows": [r + 1 for r in rs], "columns": [c + 1 for c in cs], "minor": s(d)} for rs, cs, d in found if not d.is_zero()]
    return {"order": order, "substituted": substituted, "total": len(found), "nonzero_count": len(nonzero), "all_zero": not nonzero, "nonzero": nonzero}


def noether_section(p: Problem, law: ConservationLaw, el: EulerLagrange) -> Dict[str, Any]:
    return {
        "generator": generator_section(p, law.field),
        "phi": {f"phi_{x}": s(c) for x, c in zip(p.xvar, law.phi)},
        "euler_lagrange": [s(e) for e in el.equations],
        "sign_flipped": list(el.flipped),
        "fluxes": {x: v for x, v in law.labelled(p)},
        "divergence": s(law.divergence),
        "on_shell_residual": s(law.residual),
    }


# ---------------------------------------------------------------------------
# text rendering

def _render(value: Any, indent: int, lines: List[str]) -> None:
    pad = "  " * indent
    if isinstance(value, dict):
        for k, v in sorted(value.items()):
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                _render(v, indent + 1, lines)
            else:
                lines.append(f"{pad}{k}: {_scalar(v)}")
    elif isinstance(value, list):
        for item in value:
            if isinstance(item, (dict, list)) and item:
                if isinstance(item, list) and all(not isinstance(x, (dict, list)) for x in item):
                    lines.append(f"{pad}- [{', '.join(_scalar(x) for x in item)}]")
                    continue
                lines.append(f"{pad}-")
                _render(item, indent + 1, lines)
            else:
                lines.append(f"{pad}- {_scalar(item)}")
    else:
        lines.append(f"{pad}{_scalar(value)}")


def _scalar(v: Any) -> str:
    if isinstance(v, bool):
        return "yes" if v else "no"
    if v is None:
        return "none"
    if isinstance(v, (dict, list)):
        return "{}" if isinstance(v, dict) else "[]"
    return str(v)


SECTION_ORDER = (
    "problem", "jet", "generator", "invariance", "determining", "solution", "verification",
    "algebra", "brackets", "table", "distribution", "minors", "noether", "error",
)


def pretty(report: Dict[str, Any]) -> str:
    lines = [f"liesym report (schema {report.get('schema')}), command {report.get('command')}"]
    keys = [k for k in SECTION_ORDER if k in report]
    keys += sorted(k for k in report if k not in keys and k not in ("schema", "command"))
    for key in keys:
        lines.append("")
        lines.append(f"== {key}")
        val = report[key]
        if key == "table" and isinstance(val, dict):
            lines += _table_lines(val)
            continue
        _render(val, 0, lines)
    return "\n".join(lines) + "\n"


def _table_lines(t: Dict[str, Any]) -> List[str]:
    n = t["size"]
    labels = [f"vf_{i + 1}" for i in range(n)]
    cells = [[""] + labels] + [[labels[i]] + list(row) for i, row in enumerate(t["rows"])]
    widths = [max(len(r[c]) for r in cells) for c in range(n + 1)]
    out = [f"closed: {_scalar(t['closed'])}", f"antisymmetric: {_scalar(t['antisymmetric'])}"]
    for r in cells:
        out.append("  ".join(x.rjust(w) for x, w in zip(r, widths)).rstrip())
    return out
