from __future__ import annotations

from importlib import resources

import pytest

from edskit.dsl import parse
from edskit.scalar import Coordinate, ParamRational, ScalarExpr

# filled by tests/test_acceptance.py, printed at the end of the run
ACCEPTANCE: dict = {}


def shipped(name: str):
    return parse((resources.files("edskit") / "data" / name).read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def gkdv():
    return shipped("gkdv.eds")


@pytest.fixture(scope="session")
def ch():
    return shipped("ch.eds")


def var(name: str, exponent=1) -> ScalarExpr:
    return ScalarExpr.power(Coordinate(name), exponent)


def jet(base: str, index: str) -> ScalarExpr:
    return ScalarExpr.power(Coordinate.jet(base, index))


def const(value) -> ScalarExpr:
    return ScalarExpr.const(ParamRational.of(value))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, title, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {key}. {title}: {detail}")
