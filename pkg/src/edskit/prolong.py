"""Prolongation (curvature) conditions for Lie-valued connections.

The curvature of ``eta = A dx + B dt`` is taken as
``dA ^ dx + dB ^ dt + [A, B] dx ^ dt`` and reduced modulo the ideal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .exterior import (DifferentialForm, ExteriorSystem, IdealCertificate, JetSubstitution, d,
                       ideal_reduce, section, section_form, wedge)
from .liealg import (EMPTY_TABLE, LieExpr, Realization, RelationTable, apply_realization, bracket,
                     jacobi_audit, proportional, realize_table, render_basis)
from .scalar import (ZERO, AssumptionSet, Coordinate, Decision, ParamRational, ScalarExpr,
                     _sx, is_zero, partition_exponents, render_power)


@dataclass
class Connection:
    name: str
    A: LieExpr
    B: LieExpr
    table: RelationTable = field(default_factory=RelationTable)

    def __post_init__(self):
        for part, e in (("A", self.A), ("B", self.B)):
            bad = sorted(c.name for c in e.coordinates() if c.name in ("x", "t") or c.kind == "jet")
            if bad:
                raise ValueError(f"connection {self.name}: {part} depends on {', '.join(bad)}")

    def eta(self) -> DifferentialForm:
        return DifferentialForm(1, {("x",): self.A, ("t",): self.B})


def curvature(conn: Connection, table: RelationTable | None = None) -> DifferentialForm:
    table = table if table is not None else conn.table
    fa, fb = DifferentialForm.function(conn.A), DifferentialForm.function(conn.B)
    return (wedge(d(fa), DifferentialForm.basis("x")) + wedge(d(fb), DifferentialForm.basis("t"))
            + DifferentialForm(2, {("x", "t"): bracket(conn.A, conn.B, table)}))


@dataclass
class CurvatureResult:
    residual: DifferentialForm
    certificate: IdealCertificate

    @property
    def zero(self) -> bool:
        return self.certificate.verified


def curvature_residual(conn: Connection, sys: ExteriorSystem, table: RelationTable | None = None,
                       assumptions: AssumptionSet | None = None) -> CurvatureResult:
    cert = ideal_reduce(curvature(conn, table), sys, assumptions, label=f"curvature {conn.name}")
    return CurvatureResult(cert.residual(), cert)


# --------------------------------------------------------------------------
# independent check through sections

@dataclass
class ComponentEquation:
    label: str
    expression: LieExpr
    passed: bool


@dataclass
class PdeFormReport:
    equations: list
    solved: dict

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.equations)


def _solve_jets(residuals, assumptions):
    """Solve each sectioned residual for one jet (t-jets first) with a single-term coefficient."""
    pending = list(residuals)
    solved: dict = {}
    while pending:
        best = None
        for idx, r in enumerate(pending):
            for c in r.coordinates():
                if c.kind != "jet":
                    continue
                terms = [t for t in r.terms() if any(v == c for v, _ in t.powers)]
                if len(terms) != 1 or terms[0].exponent(c) != 1:
                    continue
                coeff = r.diff(c)
                if not coeff.is_monomial() or _mentions_jet(coeff) or not assumptions.nonzero(coeff.as_term().coeff):
                    continue
                rank = (0 if c.index.endswith("t") else 1, c.order, c.name)
                if best is None or rank < best[0]:
                    best = (rank, idx, c, coeff)
        if best is None:
            raise ValueError("cannot solve the sectioned system for its jets")
        _, idx, c, coeff = best
        r = pending.pop(idx)
        value = (r - ScalarExpr.power(c) * coeff) * coeff.inverse() * ScalarExpr.const(-1)
        solved = {k: v.substitute(c, value) for k, v in solved.items()}
        solved[c] = value
        pending = [p.substitute(c, value) for p in pending]
        if any(p.is_zero() for p in pending):
            pending = [p for p in pending if not p.is_zero()]
    return solved


def _mentions_jet(e: ScalarExpr) -> bool:
    return any(c.kind == "jet" for c in e.coordinates())


def pde_form_check(conn: Connection, sys: ExteriorSystem, table: RelationTable | None = None,
                   assumptions: AssumptionSet | None = None) -> PdeFormReport:
    """Pull the curvature back to sections, impose the sectioned PDE system, and require
    every coefficient of the remaining free jets to vanish."""
    a = sys.assumptions.merged(assumptions)
    s = JetSubstitution.for_system(sys)
    residuals = [r.apply(a) for r in section(sys, s)]
    solved = _solve_jets(residuals, a)
    omega = section_form(curvature(conn, table), s)
    if not isinstance(omega, LieExpr):
        omega = LieExpr()
    for c, v in solved.items():
        omega = omega.map_coefficients(lambda e, c=c, v=v: e.substitute(c, v))
    omega = omega.apply(a)
    groups: dict = {}
    for b, coeff in omega.items():
        for t in coeff.terms():
            jets = tuple((c, e) for c, e in t.powers if c.kind == "jet")
            rest = tuple((c, e) for c, e in t.powers if c.kind != "jet")
            groups.setdefault(jets, {}).setdefault(b, ScalarExpr())
            groups[jets][b] = groups[jets][b] + ScalarExpr({rest: t.coeff})
    free = sorted({c for c in _all_free_jets(sys) if c not in solved}, key=lambda c: c.name)
    keys = [((c, ParamRational.of(1)),) for c in free] + [()]
    for k in groups:
        if k not in keys:
            keys.append(k)
    equations = []
    for k in keys:
        expr = LieExpr(groups.get(k, {}))
        label = "[" + ("*".join(render_power(c, e) for c, e in k) or "1") + "]"
        ok = all(is_zero(v, a) == Decision.YES for _, v in expr.items())
        equations.append(ComponentEquation(label, expr, ok))
    return PdeFormReport(equations, solved)


def _all_free_jets(sys: ExteriorSystem):
    return [Coordinate.jet(c, i) for c in sys.fibre_coordinates() for i in ("x", "t")]


# --------------------------------------------------------------------------
# constraint extraction

@dataclass
class Constraint:
    exponent: ParamRational
    monomial: str
    component: str
    relation: LieExpr

    def render(self, coordinate: str = "u") -> str:
        head = f"{coordinate}^({self.exponent.render()})"
        if self.monomial != "1":
            head += f"*{self.monomial}"
        return f"{head}: {self.relation.render()} = 0"


@dataclass
class ConstraintSet:
    constraints: list
    assumptions: AssumptionSet
    coordinate: str = "u"

    def relations(self) -> list:
        return [c.relation for c in self.constraints]

    def render(self) -> list:
        return [c.render(self.coordinate) for c in self.constraints]

    def __len__(self):
        return len(self.constraints)


def extract_constraints(conn: Connection, sys: ExteriorSystem, assumptions: AssumptionSet | None = None,
                        table: RelationTable | None = None, coordinate: str = "u") -> ConstraintSet:
    """Group the curvature residual by powers of ``coordinate`` (and the remaining
    fibre monomial); each group is one bracket relation that must vanish."""
    a = sys.assumptions.merged(assumptions)
    result = curvature_residual(conn, sys, table, assumptions)
    target = Coordinate(coordinate)
    buckets: dict = {}
    for key, lie_c in result.residual.apply(a).components():
        for b, coeff in lie_c.items():
            for t in coeff.terms():
                e = t.exponent(target)
                rest = tuple((c, x) for c, x in t.powers if c != target)
                rest_label = "*".join(render_power(c, x) for c, x in rest) or "1"
                comp = "d" + "^d".join(key)
                buckets.setdefault((comp, rest_label), {}).setdefault(e, {})
                slot = buckets[(comp, rest_label)][e]
                slot[b] = slot.get(b, ZERO) + t.coeff
    constraints = []
    for (comp, label), by_exp in sorted(buckets.items()):
        merged: dict = {}
        for e in by_exp:
            merged.setdefault(a.apply(e), {})
            for b, v in by_exp[e].items():
                merged[a.apply(e)][b] = merged[a.apply(e)].get(b, ZERO) + v
        for e in partition_exponents(merged, a):
            rel = LieExpr({b: ScalarExpr.const(v) for b, v in merged[e].items()}).apply(a)
            if not rel.is_zero():
                constraints.append(Constraint(e, label, comp, rel))
    constraints.sort(key=lambda c: (c.component, c.monomial, _exp_key(c.exponent)))
    return ConstraintSet(constraints, a, coordinate)


def _exp_key(e: ParamRational):
    try:
        return (0, float(e.value()), "")
    except ValueError:
        return (1, 0.0, e.render())


def constraints_equivalent(found: ConstraintSet | list, expected: list, assumptions: AssumptionSet | None = None,
                           table: RelationTable | None = None):
    """Match relations one-to-one up to provably nonzero constant factors.

    Returns ``(ok, unmatched_found, unmatched_expected)``.
    """
    from .liealg import resolve
    a = assumptions or (found.assumptions if isinstance(found, ConstraintSet) else AssumptionSet())
    rels = found.relations() if isinstance(found, ConstraintSet) else list(found)
    tbl = table or EMPTY_TABLE
    rels = [resolve(r, tbl).apply(a) for r in rels]
    exp = [resolve(e, tbl).apply(a) for e in expected]
    unmatched = list(range(len(rels)))
    missing = []
    for e in exp:
        hit = next((i for i in unmatched if proportional(rels[i], e, a) is not None), None)
        if hit is None:
            missing.append(e)
        else:
            unmatched.remove(hit)
    extra = [rels[i] for i in unmatched]
    return (not missing and not extra), extra, missing


# --------------------------------------------------------------------------
# case verification

@dataclass
class CaseReport:
    constraint_results: list        # (relation, image, satisfied)
    table_checks: list              # (pair, lhs, rhs, satisfied)
    final_table: RelationTable
    audit: object

    @property
    def constraints_satisfied(self) -> bool:
        return all(ok for *_, ok in self.constraint_results)

    @property
    def table_consistent(self) -> bool:
        return all(ok for *_, ok in self.table_checks)

    @property
    def verified(self) -> bool:
        return self.constraints_satisfied and self.table_consistent and self.audit.consistent


def verify_case(constraints, base: RelationTable, r: Realization,
                assumptions: AssumptionSet | None = None) -> CaseReport:
    if isinstance(constraints, ConstraintSet):
        a = constraints.assumptions.merged(assumptions)
        rels = constraints.relations()
    else:
        a = assumptions or AssumptionSet()
        rels = list(constraints)
    realized = realize_table(base, r, a)
    results = []
    for rel in rels:
        img = apply_realization(rel, r, base, a)
        ok = all(is_zero(v, a) == Decision.YES for _, v in img.items())
        results.append((rel, img, ok))
    gens = set(realized.table.generators())
    for rel in rels:
        gens |= rel.generators()
    gens -= r.mapped()
    audit = jacobi_audit(realized.table, sorted(gens), a)
    return CaseReport(results, realized.checks, realized.table, audit)


def render_relation(rel: LieExpr) -> str:
    return f"{rel.render()} = 0"


__all__ = [
    "Connection", "curvature", "curvature_residual", "CurvatureResult", "pde_form_check", "PdeFormReport",
    "extract_constraints", "Constraint", "ConstraintSet", "constraints_equivalent", "verify_case",
    "CaseReport", "render_basis",
]
