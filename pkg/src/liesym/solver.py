"""Polynomial-ansatz solution of linear determining systems, and verification."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .determining import DeterminingSystem
from .expr import (
    ZERO,
    Expression,
    ExpressionError,
    diff_partial,
    substitute_atoms,
    to_string,
)
from .linalg import echelon, express, nullspace, reduce_vectors
from .poly import EPSILON, FN, SYM, Atom, Poly, mono_degree, no_truncation
from .problem import JetVariable, Problem
from .prolong import VectorField, component_labels, contact_components, make_generic_generator

DEFAULT_MONOMIAL_CAP = 4000


class SolverError(ValueError):
    pass


@dataclass
class SolutionSet:
    problem: Problem
    basis: List[VectorField]
    kernel_values: List[Dict[str, Expression]]
    parameters: List[str] = field(default_factory=list)
    residual_constraints: List[Expression] = field(default_factory=list)
    nonvanishing: List[Expression] = field(default_factory=list)
    families: List[str] = field(default_factory=list)
    degree: int = 0
    monomials: int = 0
    matrix_shape: Tuple[int, int] = (0, 0)
    nullity: int = 0

    def __len__(self):
        return len(self.basis)

    def general_solution(self) -> Dict[str, Expression]:
        """Each kernel as sum_j k_j * (basis j value)."""
        out: Dict[str, Expression] = {}
        names = list(self.problem.unknowns)
        for name in names:
            total = ZERO
            for k, vals in zip(self.parameters, self.kernel_values):
                v = vals.get(name, ZERO)
                if not v.is_zero():
                    total = total + Expression.symbol(k) * v
            out[name] = total
        return out

    def instantiate(self, values: Mapping[int, object]) -> VectorField:
        """Combination sum_j values[j] * basis[j]; indices are 1-based, missing ones count as 0."""
        total: Optional[VectorField] = None
        for j, c in sorted(values.items()):
            if not 1 <= j <= len(self.basis):
                raise SolverError(f"parameter index {j} outside 1..{len(self.basis)}")
            c = c if isinstance(c, Expression) else Expression.const(c)
            term = self.basis[j - 1].scale(c)
            total = term if total is None else total + term
        if total is None:
            if not self.basis:
                raise SolverError("empty solution set")
            total = self.basis[0].scale(0)
        return total


# ---------------------------------------------------------------------------
# kernel substitution

def dep_atom(p: Problem, name: str) -> Atom:
    return p.dep_value(name).as_atom()


def kernel_derivative_value(p: Problem, value: Expression, derivs: Sequence[str]) -> Expression:
    out = value
    for d in derivs:
        out = diff_partial(out, p.dep_value(d), p.arbelem)
        if out.is_zero():
            break
    return out


def substitute_kernels(e: Expression, values: Mapping[str, Expression], p: Problem) -> Expression:
    table: Dict[Atom, Expression] = {}
    for a in e.all_atoms():
        if a[0] == FN and a[1] in values:
            table[a] = kernel_derivative_value(p, values[a[1]], a[3])
    return substitute_atoms(e, table) if table else e


def _apply_pins(e: Expression, p: Problem) -> Expression:
    if not p.assumptions:
        return e
    table = {(SYM, k): Expression.const(v) for k, v in p.assumptions.items()}
    return substitute_atoms(e, table)


# ---------------------------------------------------------------------------
# vector fields <-> kernel values

def field_from_values(p: Problem, values: Mapping[str, Expression]) -> VectorField:
    generic = make_generic_generator(p)
    full = {name: values.get(name, ZERO) for name in p.unknowns}
    comps = tuple(substitute_kernels(c, full, p) for c in generic.components)
    omega = None if generic.omega is None else substitute_kernels(generic.omega, full, p)
    phi = tuple(substitute_kernels(c, full, p) for c in generic.phi)
    return VectorField(comps, generic.flavor, omega, phi)


def _eps_split(e: Expression, top: int) -> List[Expression]:
    if EPSILON in e.den.atoms():
        raise SolverError("epsilon in a denominator")
    parts = e.num.coefficients_in([EPSILON])
    out = [ZERO] * (top + 1)
    for mono, coeff in parts.items():
        k = mono[0][1] if mono else 0
        if k > top:
            raise SolverError(f"epsilon^{k} exceeds approxorder={top}")
        out[k] = out[k] + Expression(coeff, e.den)
    return out


def _to_order_zero(p: Problem, e: Expression) -> Expression:
    """Rename physical dependent variables u to u0 (approximate mode)."""
    table = {}
    for a in e.all_atoms():
        if a[0] == SYM:
            info = p.jet_info(a[1])
            if info is not None and info.k is None:
                if info.order:
                    raise SolverError("approximate generators may not depend on derivatives")
                table[a] = p.jet_symbol(JetVariable(info.dep, (), 0))
    return substitute_atoms(e, table) if table else e


def values_from_field(p: Problem, vf: VectorField) -> Dict[str, Expression]:
    """Kernel assignment reproducing ``vf`` (normalising conditional fields)."""
    n, m = p.n, p.m
    comps = list(vf.components)
    expected = n + m + (len(p.arbelem) if p.mode == "equivalence" else 0)
    if len(comps) != expected:
        raise SolverError(f"field has {len(comps)} components, expected {expected}")
    out: Dict[str, Expression] = {}
    if p.mode == "contact":
        omega = vf.omega
        if omega is None:
            omega = comps[n]
            for i in range(n):
                omega = omega - p.jet_symbol(JetVariable(0, (i,))) * comps[i]
        xi, eta = contact_components(omega, p)
        for a, b in zip(xi + [eta], comps):
            if not (a - b).is_zero():
                raise SolverError("components are not generated by a characteristic function")
        return {"omega": omega}
    if p.mode == "conditional":
        star = p.nonclassical - 1
        c = comps[star]
        if c.is_zero():
            raise SolverError(f"component {star + 1} vanishes; the field cannot be normalised")
        comps = [x / c for x in comps]
        for j in range(star):
            if not comps[j].is_zero():
                raise SolverError("components before the normalised one must vanish")
    if p.approximate:
        top = p.approxorder
        for i, x in enumerate(p.xvar):
            parts = _eps_split(_to_order_zero(p, comps[i]), top)
            for k, part in enumerate(parts):
                name = f"xi{k}_{x}"
                if name in p.unknowns:
                    out[name] = part
        for a, u in enumerate(p.uvar):
            parts = _eps_split(_to_order_zero(p, comps[n + a]), top)
            for k, part in enumerate(parts):
                out[f"eta{k}_{u}"] = part
        return out
    for i, x in enumerate(p.xvar):
        if f"xi_{x}" in p.unknowns:
            out[f"xi_{x}"] = comps[i]
    for a, u in enumerate(p.uvar):
        out[f"eta_{u}"] = comps[n + a]
    if p.mode == "equivalence":
        for j, name in enumerate(p.arbelem):
            out[f"mu_{name}"] = comps[n + m + j]
    if p.mode == "variational":
        phi = vf.phi or tuple(ZERO for _ in p.xvar)
        for x, c in zip(p.xvar, phi):
            out[f"phi_{x}"] = c
    return out


def contact_field_from_triple(p: Problem, xi: Expression, eta: Expression, eta_x: Optional[Expression] = None) -> VectorField:
    """Contact field from (xi, eta, eta_[x]) for one independent variable."""
    if p.n != 1 or p.m != 1:
        raise SolverError("triples describe contact fields in one independent variable")
    ux = p.jet_symbol(JetVariable(0, (0,)))
    omega = eta - ux * xi
    cx, ce = contact_components(omega, p)
    if not (cx[0] - xi).is_zero():
        raise SolverError(f"xi = {xi} is inconsistent with the characteristic {omega}")
    if eta_x is not None:
        expect = diff_partial(omega, p.xvar[0]) + ux * diff_partial(omega, p.uvar[0])
        if not (expect - eta_x).is_zero():
            raise SolverError(f"first prolongation {eta_x} is inconsistent with the characteristic {omega}")
    return VectorField((cx[0], ce), "contact", omega=omega)


def is_proper_contact(p: Problem, vf: VectorField) -> bool:
    """True when the characteristic is nonlinear in the first derivatives."""
    omega = vf.omega
    if omega is None:
        return False
    for i in range(p.n):
        d = diff_partial(omega, p.jet_name(JetVariable(0, (i,))))
        for j in range(p.n):
            if not diff_partial(d, p.jet_name(JetVariable(0, (j,)))).is_zero():
                return True
    return False


# ---------------------------------------------------------------------------
# constraints

@dataclass(frozen=True)
class RewriteRule:
    lhs: Atom
    rhs: Expression

    def __str__(self):
        return f"{to_string(Expression.from_atom(self.lhs))} -> {to_string(self.rhs)}"


def _multiset_minus(big: Tuple[str, ...], small: Tuple[str, ...]) -> Optional[List[str]]:
    rest = list(big)
    for s in small:
        if s in rest:
            rest.remove(s)
        else:
            return None
    return rest


def apply_rules(e: Expression, rules: Sequence[RewriteRule], p: Problem, max_passes: int = 50) -> Expression:
    """Rewrite kernel derivatives covered by a rule (and their derivatives) until stable."""
    if not rules:
        return e
    for _ in range(max_passes):
        table: Dict[Atom, Expression] = {}
        for a in e.all_atoms():
            for r in rules:
                if a == r.lhs:
                    table[a] = r.rhs
                    break
                if r.lhs[0] == SYM:
                    continue
                if a[0] == FN and a[1] == r.lhs[1] and a[2] == r.lhs[2]:
                    extra = _multiset_minus(a[3], r.lhs[3])
                    if extra is not None:
                        val = r.rhs
                        for d in extra:
                            val = diff_partial(val, p.dep_value(d) if d in p.arbelem else d)
                        table[a] = val
                        break
        if not table:
            return e
        e = substitute_atoms(e, table)
    raise SolverError("rewrite rules do not terminate")


def parse_rules(text: str, p: Problem, functions: Optional[Mapping[str, Tuple[str, ...]]] = None) -> List[RewriteRule]:
    """``lhs -> rhs`` lines; ``depend`` lines declare extra functions."""
    funcs = dict(functions or {})
    rules = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("depend "):
            name, deps = _parse_depend(line, lineno)
            funcs[name] = deps
            continue
        if "->" not in line:
            raise SolverError(f"line {lineno}: expected 'lhs -> rhs'")
        lhs_t, rhs_t = line.split("->", 1)
        try:
            lhs = p.parse(lhs_t, funcs)
            rhs = p.parse(rhs_t, funcs)
        except ExpressionError as exc:
            raise SolverError(f"line {lineno}: {exc}") from None
        a = lhs.as_atom()
        if a is None:
            raise SolverError(f"line {lineno}: left-hand side must be a single symbol or derivative")
        rules.append(RewriteRule(a, rhs))
    return rules


def _parse_depend(line: str, lineno: int) -> Tuple[str, Tuple[str, ...]]:
    body = line[len("depend"):].strip()
    if "=" in body:
        name, deps = body.split("=", 1)
        parts = [d.strip() for d in deps.split(",")]
    else:
        name, *parts = [s.strip() for s in body.split(",")]
    name = name.strip()
    if not name or not all(parts):
        raise SolverError(f"line {lineno}: malformed depend line")
    return name, tuple(parts)


# ---------------------------------------------------------------------------
# solution files

@dataclass
class Candidate:
    name: str
    entries: Dict[str, Expression]


_SECTION = re.compile(r"^\[\s*generator\s+([A-Za-z0-9_.\-]+)\s*\]$")


def parse_solution_file(text: str, p: Problem) -> Tuple[List[Candidate], Dict[str, Tuple[str, ...]]]:
    funcs: Dict[str, Tuple[str, ...]] = {}
    cands: List[Candidate] = []
    current: Optional[Candidate] = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            current = Candidate(m.group(1), {})
            cands.append(current)
            continue
        if line.startswith("depend "):
            name, deps = _parse_depend(line, lineno)
            funcs[name] = deps
            continue
        if current is None:
            raise SolverError(f"line {lineno}: entry outside a [generator NAME] section")
        if "=" not in line:
            raise SolverError(f"line {lineno}: expected 'name = expression'")
        key, val = (s.strip() for s in line.split("=", 1))
        if key in current.entries:
            raise SolverError(f"line {lineno}: {key} given twice")
        try:
            current.entries[key] = p.parse(val, funcs)
        except ExpressionError as exc:
            raise SolverError(f"line {lineno}: {exc}") from None
    return cands, funcs


def candidate_field(p: Problem, cand: Candidate) -> VectorField:
    entries = dict(cand.entries)
    labels = component_labels(p)
    if p.mode == "contact":
        if "omega" in entries:
            omega = entries.pop("omega")
            xi, eta = contact_components(omega, p)
            vf = VectorField(tuple(xi) + (eta,), "contact", omega=omega)
        else:
            x, u = p.xvar[0], p.uvar[0]
            xi = entries.pop(f"xi_{x}", ZERO)
            eta = entries.pop(f"eta_{u}", ZERO)
            eta_x = entries.pop(f"eta_{u}_{x}", None)
            vf = contact_field_from_triple(p, xi, eta, eta_x)
        if entries:
            raise SolverError(f"generator {cand.name}: unexpected entries {sorted(entries)}")
        return vf
    comps = tuple(entries.pop(label, ZERO) for label in labels)
    phi = ()
    if p.mode == "variational":
        phi = tuple(entries.pop(f"phi_{x}", ZERO) for x in p.xvar)
    if entries:
        raise SolverError(f"generator {cand.name}: unexpected entries {sorted(entries)}")
    flavor = {"point": "point", "conditional": "conditional", "variational": "variational", "equivalence": "equivalence"}[p.mode]
    if p.approximate:
        flavor = "approximate"
    return VectorField(comps, flavor, None, phi)


# ---------------------------------------------------------------------------
# verification

@dataclass
class Residual:
    field_index: int
    equation_index: int
    residual: Expression
    eps_order: Optional[int] = None


@dataclass
class VerificationReport:
    residuals: List[Residual]
    checked: int
    fields: int

    @property
    def ok(self) -> bool:
        return not self.residuals


def verify_values(
    values: Mapping[str, Expression],
    ds: DeterminingSystem,
    rules: Sequence[RewriteRule] = (),
    field_index: int = 0,
) -> List[Residual]:
    p = ds.problem
    out = []
    full = {name: values.get(name, ZERO) for name in ds.unknowns}
    for idx, eq in enumerate(ds.equations):
        r = substitute_kernels(_apply_pins(eq, p), full, p)
        r = apply_rules(r, rules, p)
        if not r.is_zero():
            order = ds.eps_orders[idx] if ds.eps_orders is not None else None
            out.append(Residual(field_index, idx, r, order))
    return out


def verify(fields: Sequence[VectorField], ds: DeterminingSystem, rules: Sequence[RewriteRule] = ()) -> VerificationReport:
    p = ds.problem
    residuals: List[Residual] = []
    for i, vf in enumerate(fields):
        values = values_from_field(p, vf)
        residuals += verify_values(values, ds, rules, i)
    return VerificationReport(residuals, len(ds.equations) * len(fields), len(fields))


# ---------------------------------------------------------------------------
# ansatz

def _box_monomials(atoms: Sequence[Atom], degree: int):
    for exps in product(range(degree + 1), repeat=len(atoms)):
        yield tuple(sorted((a, e) for a, e in zip(atoms, exps) if e))


def _poly_derivative(poly: Poly, p: Problem, derivs: Sequence[str]) -> Poly:
    out = poly
    for d in derivs:
        out = out.diff(dep_atom(p, d))
        if out.is_zero():
            break
    return out


def _check_free_parameters(equations: Iterable[Expression], p: Problem) -> None:
    free = {f for f in p.freepars if f not in p.assumptions and f not in p.functions}
    if not free:
        return
    for e in equations:
        hit = {a[1] for a in e.all_atoms() if a[0] == SYM and a[1] in free}
        if hit:
            names = ", ".join(sorted(hit))
            raise SolverError(
                f"free parameter(s) {names} still appear in the determining system;"
                " pin them with 'assume name = value'"
            )


def _is_linear_homogeneous_pde(p: Problem) -> bool:
    if p.mode != "point" or p.approximate or p.n < 2 or not p.diffeqs:
        return False
    for eq in p.diffeqs:
        if not eq.den.is_const():
            return False
        jets = set()
        for a in eq.all_atoms():
            if a[0] == SYM and p.jet_info(a[1]) is not None:
                jets.add(a)
            elif a[0] != SYM:
                return False
        for mono, _ in eq.num.iter_terms():
            deg = sum(e for a, e in mono if a in jets)
            if deg != 1:
                return False
    return True


def ansatz_solve(ds: DeterminingSystem, degree: int = 2, cap: int = DEFAULT_MONOMIAL_CAP) -> SolutionSet:
    p = ds.problem
    if not ds.linear:
        raise SolverError("the determining system is nonlinear; use verification instead")
    if degree < 0:
        raise SolverError("degree must be nonnegative")
    equations = [_apply_pins(e, p) for e in ds.equations]
    _check_free_parameters(equations, p)

    names = list(ds.unknowns)
    columns: List[Tuple[int, Tuple]] = []
    col_polys: List[Poly] = []
    for ki, name in enumerate(names):
        atoms = [dep_atom(p, d) for d in ds.unknowns[name]]
        count = (degree + 1) ** len(atoms)
        if len(columns) + count > cap:
            total = sum((degree + 1) ** len(ds.unknowns[n]) for n in names)
            raise SolverError(f"ansatz needs {total} monomials but the cap is {cap}; raise the cap or lower the degree")
        for mono in _box_monomials(atoms, degree):
            columns.append((ki, mono))
            col_polys.append(Poly({mono: 1}))
    ncols = len(columns)
    kernel_cols: Dict[int, List[int]] = {}
    for c, (ki, _) in enumerate(columns):
        kernel_cols.setdefault(ki, []).append(c)
    index_of = {n: i for i, n in enumerate(names)}

    rows: Dict[Tuple[int, Tuple], Dict[int, Fraction]] = {}
    with no_truncation():
        for ei, eq in enumerate(equations):
            num = eq.num
            katoms = {a for a in num.atoms() if a[0] == FN and a[1] in index_of}
            parts = num.coefficients_in(katoms)
            for kmono, coeff in parts.items():
                if not kmono:
                    raise SolverError(f"equation {ei + 1} is inhomogeneous")
                if len(kmono) != 1 or kmono[0][1] != 1:
                    raise SolverError(f"equation {ei + 1} is nonlinear in the unknowns")
                atom = kmono[0][0]
                for c in kernel_cols[index_of[atom[1]]]:
                    d = _poly_derivative(col_polys[c], p, atom[3])
                    if d.is_zero():
                        continue
                    contrib = coeff * d
                    for mono, val in contrib.iter_terms():
                        row = rows.setdefault((ei, mono), {})
                        nv = row.get(c, 0) + val
                        if nv:
                            row[c] = nv
                        else:
                            row.pop(c, None)
    matrix = [r for r in rows.values() if r]
    null = nullspace(matrix, ncols)

    phi_kernels = {i for i, n in enumerate(names) if n.startswith("phi_")}
    superposition = _is_linear_homogeneous_pde(p)
    dep_atoms = {dep_atom(p, u) for u in p.uvar}

    def droppable(c: int) -> bool:
        ki, mono = columns[c]
        if ki in phi_kernels:
            return True
        if superposition and names[ki].startswith("eta_"):
            return not any(a in dep_atoms for a, _ in mono)
        return False

    def order_key(c: int):
        ki, mono = columns[c]
        return (1 if droppable(c) else 0, -mono_degree(mono), ki, tuple((repr(a), -e) for a, e in mono))

    order = sorted(range(ncols), key=order_key)
    reduced = reduce_vectors(null, order)
    families: List[str] = []
    kept = []
    rank_of = {c: i for i, c in enumerate(order)}
    for v in reduced:
        lead = min(v, key=rank_of.__getitem__)
        if droppable(lead):
            continue
        kept.append(v)
    if superposition:
        # discard the u-free parts of eta and re-reduce: the superposition family
        stripped = [{c: x for c, x in v.items() if not (droppable(c) and columns[c][0] not in phi_kernels)} for v in kept]
        kept = reduce_vectors(stripped, order)
        for a, u in enumerate(p.uvar):
            eqtxt = ", ".join(to_string(_solution_constraint(p, eq, a)) for eq in p.diffeqs)
            families.append(f"eta_{u} = f({', '.join(p.xvar)}) with {eqtxt} = 0")

    values_list: List[Dict[str, Expression]] = []
    basis: List[VectorField] = []
    for v in kept:
        vals: Dict[str, Poly] = {}
        for c, x in v.items():
            ki, mono = columns[c]
            vals.setdefault(names[ki], {})[mono] = x
        values = {n: Expression(Poly(t)) for n, t in vals.items()}
        residual = verify_values(values, _with_equations(ds, equations))
        if residual:
            raise SolverError("internal error: ansatz solution fails verification")
        values_list.append(values)
        basis.append(field_from_values(p, values))
    params = [f"k_{i + 1}" for i in range(len(basis))]
    return SolutionSet(
        problem=p,
        basis=basis,
        kernel_values=values_list,
        parameters=params,
        residual_constraints=[],
        nonvanishing=list(ds.nonvanishing),
        families=families,
        degree=degree,
        monomials=ncols,
        matrix_shape=(len(matrix), ncols),
        nullity=len(null),
    )


def _with_equations(ds: DeterminingSystem, equations: List[Expression]) -> DeterminingSystem:
    return DeterminingSystem(ds.problem, tuple(equations), ds.unknowns, ds.linear, ds.eps_orders, ds.nonvanishing, ds.split_variables)


def _solution_constraint(p: Problem, eq: Expression, a: int) -> Expression:
    """The equation with u_alpha replaced by a function f of the independent variables."""
    f = Expression.kernel("f", p.xvar)
    table = {}
    for atom in eq.all_atoms():
        if atom[0] == SYM:
            info = p.jet_info(atom[1])
            if info is not None and info.dep == a:
                val = f
                for i in info.index:
                    val = diff_partial(val, p.xvar[i])
                table[atom] = val
    return substitute_atoms(eq, table)


# ---------------------------------------------------------------------------
# linear independence

def field_vector(vf: VectorField) -> Dict[Tuple, Fraction]:
    out: Dict[Tuple, Fraction] = {}
    parts = list(vf.components) + list(vf.phi)
    for ci, e in enumerate(parts):
        dkey = e.den.key()
        for mono, c in e.num.iter_terms():
            out[(ci, dkey, mono)] = Fraction(c)
    return out


def essential_generators(fields: Sequence[VectorField]):
    """Maximal linearly independent subset plus expansions of the discarded fields."""
    vecs = [field_vector(f) for f in fields]
    keys = sorted({k for v in vecs for k in v}, key=repr)
    idx = {k: i for i, k in enumerate(keys)}
    ivecs = [{idx[k]: c for k, c in v.items()} for v in vecs]
    kept: List[int] = []
    certificates: Dict[int, List[Tuple[int, Fraction]]] = {}
    for i, v in enumerate(ivecs):
        coeffs = express(v, [ivecs[j] for j in kept]) if kept else (None if v else [])
        if coeffs is None:
            kept.append(i)
        else:
            certificates[i] = [(kept[j], c) for j, c in enumerate(coeffs) if c]
    return kept, certificates


def span_rank(fields: Sequence[VectorField]) -> int:
    vecs = [field_vector(f) for f in fields]
    keys = sorted({k for v in vecs for k in v}, key=repr)
    idx = {k: i for i, k in enumerate(keys)}
    return len(echelon([{idx[k]: c for k, c in v.items()} for v in vecs])[0])
