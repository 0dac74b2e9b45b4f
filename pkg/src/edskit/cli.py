"""Command driver: ``edskit COMMAND FILE [options]``.

Exit codes: 0 verified, 1 failed, 2 parse or usage error, 3 ambiguous.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import __version__
from .backlund import BacklundSystem, compatibility_residual, verify_potential_equation
from .conserve import build_theta, check_exact, check_extended_closure, check_potential
from .dsl import ParseError, SystemFile, parse, parse_fact
from .exterior import EliminationError, check_closed, eliminate, section
from .liealg import jacobi_audit, render_basis
from .prolong import (Connection, constraints_equivalent, curvature_residual, extract_constraints,
                      pde_form_check, verify_case)
from .scalar import AssumptionSet, CaseSplitError, Decision, JetOrderError, ParamRational, is_zero

SCHEMA = 1
EXIT_CODES = {"verified": 0, "failed": 1, "ambiguous": 3}


class UsageError(Exception):
    pass


def exit_code(report: dict) -> int:
    return EXIT_CODES[report["verdict"]]


def locate(path: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    shipped = resources.files("edskit") / "data" / p.name
    if shipped.is_file():
        return Path(str(shipped))
    raise UsageError(f"no such file: {path}")


def load(path: str) -> SystemFile:
    return parse(locate(path).read_text(encoding="utf-8"))


def assumptions_from(sf: SystemFile, items) -> AssumptionSet:
    a = AssumptionSet()
    for item in items or ():
        if item in sf.cases:
            a = a.merged(sf.case(item))
            continue
        expr, op, pref = parse_fact(sf, item)
        a = a.with_equality(expr, pref) if op == "=" else a.with_disequality(expr)
    return a


def _key_values(pairs) -> dict:
    out = {}
    for item in pairs or ():
        name, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"expected NAME=VALUE, got {item!r}")
        try:
            out[name.strip()] = Fraction(value.strip())
        except ValueError:
            raise UsageError(f"not a rational number: {value!r}") from None
    return out


def _report(command: str, sf: SystemFile, verdict: str, **fields) -> dict:
    base = {"schema": SCHEMA, "command": command, "system": sf.name, "verdict": verdict,
            "version": __version__, "seed": None, "certificates": [], "constraints": [], "violations": [],
            "numeric": None, "notes": []}
    base.update(fields)
    return base


def _lookup(table: dict, name: str, what: str):
    if name is None:
        raise UsageError(f"--{what} is required")
    if name not in table:
        raise UsageError(f"unknown {what} {name!r}; known: {', '.join(table) or 'none'}")
    return table[name]


# --------------------------------------------------------------------------
# commands

def cmd_close(sf: SystemFile, args) -> dict:
    a = assumptions_from(sf, args.assume)
    certs = check_closed(sf.system(), a)
    entries = [{"target": c.label, "multipliers": c.render_multipliers(),
                "residual": c.residual().render(), "verified": c.verified} for c in certs]
    ok = all(c.verified for c in certs)
    return _report("close", sf, "verified" if ok else "failed", certificates=entries)


def _fix_params(a: AssumptionSet, mapping: dict) -> AssumptionSet:
    return AssumptionSet(tuple(e.subs(mapping) for e in a.equalities),
                         tuple(e.subs(mapping) for e in a.disequalities),
                         frozenset(n for n in a.nonzero_params if n not in mapping), a.solve_for)


def _sectioned(sf: SystemFile, args):
    sys_ = sf.system()
    a = sys_.assumptions.merged(assumptions_from(sf, args.assume))
    fixed = {k: ParamRational.of(v) for k, v in _key_values(args.set).items()}
    if fixed:
        sys_ = sys_.subs_params(fixed)
        a = _fix_params(a, fixed)
    return sys_, a


def cmd_section(sf: SystemFile, args) -> dict:
    sys_, a = _sectioned(sf, args)
    residuals = [r.apply(a) for r in section(sys_)]
    fields = {"residuals": [{"generator": n, "residual": r.render()} for n, r in zip(sys_.names, residuals)]}
    if args.eliminate:
        try:
            fields["pde"] = eliminate(residuals).apply(a).render()
        except EliminationError as exc:
            return _report("section", sf, "failed", notes=[str(exc)], **fields)
    return _report("section", sf, "verified", **fields)


def _connection(sf: SystemFile, args):
    A, B, tname = _lookup(sf.connections, args.connection, "connection")
    table = sf.table(args.table or tname)
    return Connection(args.connection, A, B, table), table


def cmd_prolong(sf: SystemFile, args) -> dict:
    sys_ = sf.system()
    a = assumptions_from(sf, args.assume)
    if args.assume_case:
        _lookup(sf.cases, args.assume_case, "case")
        a = a.merged(sf.case(args.assume_case))
    if args.extract:
        return _extract(sf, sys_, a, args)
    conn, table = _connection(sf, args)
    result = curvature_residual(conn, sys_, table, a)
    pde = pde_form_check(conn, sys_, table, a)
    cert = result.certificate
    fields = {
        "certificates": [{"target": cert.label, "multipliers": cert.render_multipliers(),
                          "residual": result.residual.render(), "verified": cert.verified}],
        "pde_form": [{"label": e.label, "expression": e.expression.render(), "passed": e.passed}
                     for e in pde.equations],
        "routes_agree": pde.passed == result.zero,
    }
    return _report("prolong", sf, "verified" if result.zero else "failed", **fields)


def _extract(sf: SystemFile, sys_, a: AssumptionSet, args) -> dict:
    conn, table = _connection(sf, args)
    try:
        found = extract_constraints(conn, sys_, a, table)
    except CaseSplitError as exc:
        diffs = [d.render() for d in exc.differences]
        return _report("prolong", sf, "ambiguous", undecided=diffs,
                       notes=[f"case split required on: {', '.join(diffs)}"])
    fields = {"constraints": [{"exponent": c.exponent.render(), "monomial": c.monomial,
                               "component": c.component, "relation": c.relation.render()}
                              for c in found.constraints]}
    verdict = "verified"
    if args.expect:
        expected = _lookup(sf.relations, args.expect, "relations")
        ok, extra, missing = constraints_equivalent(found, expected, found.assumptions, table)
        fields["unmatched_found"] = [r.render() for r in extra]
        fields["unmatched_expected"] = [r.render() for r in missing]
        verdict = "verified" if ok else "failed"
    if args.realize:
        r = _lookup(sf.realizations, args.realize, "realization")
        rep = verify_case(found, table, r)
        fields["relation_checks"] = [{"relation": rel.render(), "image": img.render(), "satisfied": ok}
                                     for rel, img, ok in rep.constraint_results]
        fields["table_checks"] = [{"pair": render_basis(pair), "lhs": lhs.render(), "rhs": rhs.render(),
                                   "satisfied": ok} for pair, lhs, rhs, ok in rep.table_checks]
        fields["final_table"] = rep.final_table.render()
        fields["violations"] = _violations(rep.audit)
        if not rep.verified:
            verdict = "failed"
    return _report("prolong", sf, verdict, **fields)


def _violations(audit) -> list:
    return [{"triple": list(t), "residual": r.render()} for t, r in audit.violations]


def cmd_audit(sf: SystemFile, args) -> dict:
    table = _lookup(sf.tables, args.table, "table")
    a = sf.assumption_set().merged(assumptions_from(sf, args.assume))
    audit = jacobi_audit(table, None, a)
    fields = {"violations": _violations(audit),
              "undecidable": [{"triple": list(t), "residual": r.render()} for t, r in audit.undecidable],
              "table": table.render()}
    if audit.violations:
        verdict = "failed"
    elif audit.undecidable:
        verdict = "ambiguous"
    else:
        verdict = "verified"
    return _report("audit", sf, verdict, **fields)


def cmd_conserve(sf: SystemFile, args) -> dict:
    g, omega = _lookup(sf.conservations, args.candidate, "candidate")
    sys_ = sf.system()
    a = sys_.assumptions.merged(assumptions_from(sf, args.assume))
    theta = build_theta(g, sys_)
    exact = check_exact(theta, a)
    fields = {"theta": theta.apply(a).render(), "d_theta": exact.residual.render(), "exact": exact.holds}
    ok = exact.holds
    if omega is not None:
        pot = check_potential(omega, theta, a)
        certs = check_extended_closure(sys_, omega, "v", a)
        fields["potential"] = {"holds": pot.holds, "residual": pot.residual.render()}
        fields["certificates"] = [{"target": c.label, "multipliers": c.render_multipliers(),
                                   "residual": c.residual().render(), "verified": c.verified} for c in certs]
        ok = ok and pot.holds and all(c.verified for c in certs)
    return _report("conserve", sf, "verified" if ok else "failed", **fields)


def cmd_backlund(sf: SystemFile, args) -> dict:
    F, G = _lookup(sf.backlunds, args.system, "system")
    sys_ = sf.system()
    a = sys_.assumptions.merged(assumptions_from(sf, args.assume))
    pde = eliminate([r.apply(a) for r in section(sys_)]).apply(a)
    b = BacklundSystem(args.system, F, G, pde, dict(sf.parameters))
    lam, rem = compatibility_residual(b)
    lam, rem = lam.apply(a), rem.apply(a)
    compatible = is_zero(rem, a) == Decision.YES
    fields = {"pde": pde.render(), "multiplier": lam.render(), "remainder": rem.render(),
              "compatible": compatible}
    if args.numeric is None:
        return _report("backlund", sf, "verified" if compatible else "failed", **fields)
    values = _key_values(args.numeric)
    missing = {"n", "m", "gamma", "alpha"} - set(values)
    if missing:
        raise UsageError(f"--numeric needs values for {', '.join(sorted(missing))}")
    rep = verify_potential_equation(b, values["n"], values["m"], values["gamma"], values["alpha"],
                                    trials=args.trials, seed=args.seed, tol=args.tol, mutate=args.mutate)
    fields["numeric"] = {"passed": rep.passed, "worst_relative_residual": rep.worst, "trials": rep.trials,
                         "tol": rep.tol, "mutated": args.mutate,
                         "parameters": {k: str(v) for k, v in sorted(values.items())}}
    return _report("backlund", sf, "verified" if rep.passed else "failed", seed=args.seed, **fields)


COMMANDS = {"close": cmd_close, "section": cmd_section, "prolong": cmd_prolong, "audit": cmd_audit,
            "conserve": cmd_conserve, "backlund": cmd_backlund}


# --------------------------------------------------------------------------
# output

def render_human(report: dict) -> str:
    out = [f"{report['command']} {report['system']}: {report['verdict'].upper()}"]
    for c in report.get("certificates", []):
        mark = "ok" if c["verified"] else "FAILED"
        out.append(f"  {c['target']} [{mark}]")
        for gen, m in c["multipliers"].items():
            if m != "0":
                out.append(f"    {gen}: {m}")
        if not c["verified"]:
            out.append(f"    remainder: {c['residual']}")
    for r in report.get("residuals", []):
        out.append(f"  {r['generator']}: {r['residual']} = 0")
    if "pde" in report:
        out.append(f"  pde: {report['pde']} = 0")
    for e in report.get("pde_form", []):
        out.append(f"  {e['label']}: {e['expression']} = 0 [{'ok' if e['passed'] else 'FAILED'}]")
    if "routes_agree" in report:
        out.append(f"  routes agree: {'yes' if report['routes_agree'] else 'NO'}")
    for c in report.get("constraints", []):
        head = f"u^({c['exponent']})" + ("" if c["monomial"] == "1" else f"*{c['monomial']}")
        out.append(f"  {head}: {c['relation']} = 0")
    for key in ("unmatched_found", "unmatched_expected"):
        for r in report.get(key, []):
            out.append(f"  {key.replace('_', ' ')}: {r} = 0")
    for c in report.get("relation_checks", []):
        out.append(f"  {c['relation']} = 0 -> {c['image']} [{'ok' if c['satisfied'] else 'FAILED'}]")
    for c in report.get("table_checks", []):
        if not c["satisfied"]:
            out.append(f"  table relation {c['pair']}: {c['lhs']} != {c['rhs']}")
    for line in report.get("final_table", []) or report.get("table", []):
        out.append(f"  {line}")
    for v in report.get("violations", []):
        out.append(f"  Jacobi violated on ({', '.join(v['triple'])}): {v['residual']}")
    for v in report.get("undecidable", []):
        text = v if isinstance(v, str) else f"({', '.join(v['triple'])}): {v['residual']}"
        out.append(f"  undecided: {text}")
    if "theta" in report:
        out.append(f"  theta = {report['theta']}")
        out.append(f"  d theta = {report['d_theta']}")
    if "potential" in report:
        out.append(f"  d omega - theta = {report['potential']['residual']}")
    if "multiplier" in report:
        out.append(f"  multiplier: {report['multiplier']}")
        out.append(f"  remainder: {report['remainder']}")
    if report.get("numeric"):
        n = report["numeric"]
        out.append(f"  potential equation: {'passed' if n['passed'] else 'FAILED'} "
                   f"(worst {n['worst_relative_residual']:.3g}, {n['trials']} trials, seed {report['seed']})")
    out.extend(f"  note: {n}" for n in report.get("notes", []))
    return "\n".join(out)


def render_machine(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="system file (.eds); shipped examples are found by name")
    common.add_argument("--format", choices=("human", "machine"), default="human")
    common.add_argument("--assume", action="append", default=[],
                        help="case name from the file or a relation such as 'n - 1 != 0' (repeatable)")

    parser = argparse.ArgumentParser(prog="edskit", description="Verify exterior differential systems.")
    parser.add_argument("--version", action="version", version=f"edskit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("close", parents=[common], help="certify that d(generator) lies in the ideal")
    p = sub.add_parser("section", parents=[common], help="pull the system back to a section")
    p.add_argument("--eliminate", action="store_true", help="reduce to a single equation")
    p.add_argument("--set", nargs="+", metavar="NAME=VALUE", help="fix parameter values")
    p = sub.add_parser("prolong", parents=[common], help="curvature of a connection modulo the ideal")
    p.add_argument("--connection", default=None)
    p.add_argument("--table", default=None, help="override the connection's bracket table")
    p.add_argument("--extract", action="store_true", help="separate the residual by powers of u")
    p.add_argument("--assume-case", default=None)
    p.add_argument("--expect", default=None, help="relations block to compare against")
    p.add_argument("--realize", default=None, help="realization to check against the extracted relations")
    p = sub.add_parser("conserve", parents=[common], help="exactness of a conservation candidate")
    p.add_argument("--candidate", default=None)
    p = sub.add_parser("backlund", parents=[common], help="compatibility of a Backlund pair")
    p.add_argument("--system", default=None)
    p.add_argument("--numeric", nargs="+", metavar="NAME=VALUE", default=None)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--mutate", action="store_true", help="flip the sign of the squared-derivative term")
    p = sub.add_parser("audit", parents=[common], help="Jacobi audit of a bracket table")
    p.add_argument("--table", default=None)
    return parser


def run(argv=None) -> tuple[dict, int]:
    args = build_parser().parse_args(argv)
    sf = load(args.file)
    if args.command == "prolong" and not args.connection:
        raise UsageError("--connection is required")
    report = COMMANDS[args.command](sf, args)
    report["format"] = args.format
    return report, exit_code(report)


def main(argv=None) -> int:
    try:
        report, code = run(argv)
    except (ParseError, UsageError, KeyError, JetOrderError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"edskit: error: {msg}", file=sys.stderr)
        return 2
    fmt = report.pop("format")
    print(render_machine(report) if fmt == "machine" else render_human(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
