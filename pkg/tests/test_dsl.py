import pytest

from edskit.dsl import ParseError, parse, parse_fact, render
from edskit.exterior import DifferentialForm
from edskit.liealg import LieExpr
from edskit.scalar import Coordinate, Decision, ScalarExpr, param

from conftest import shipped, var

HEADER = "system demo\nparam a nonzero\ncoord x t u p\ngenerator X Y\n"


@pytest.mark.parametrize("name", ["gkdv.eds", "ch.eds"])
def test_round_trip(name):
    first = shipped(name)
    again = parse(render(first))
    assert again == first
    assert render(again) == render(first)


def test_repeated_wedge_is_zero():
    sf = parse(HEADER + "form z = du /\\ du\nform w = du /\\ dt - p*dx /\\ dt\n")
    assert sf.forms["z"].is_zero()
    assert sf.forms["w"] == DifferentialForm.basis("u", "t") - DifferentialForm.basis("x", "t").scale(var("p"))


def test_caret_is_power_and_binds_tighter_than_minus():
    sf = parse(HEADER + "form w = -u^2*dx\n")
    assert sf.forms["w"] == DifferentialForm.basis("x").scale(-var("u", 2))


def test_composite_power_becomes_aux():
    sf = parse(HEADER + "coord q\nform w = (u - q)^(1/a)*dx\n")
    (key, c), = sf.forms["w"].components()
    (coord, e), = next(iter(c.terms())).powers
    assert coord == Coordinate.aux({"u": 1, "q": -1})
    assert e.render() == "1/a"


def test_named_aux_coordinate():
    sf = parse(HEADER + "coord q\ncoord xi = u - q\nform w = xi^a*dx\n")
    assert "xi" in sf.aux
    assert "coord xi = u - q" in render(sf)


def test_jets_and_total_derivatives():
    sf = parse(HEADER + "backlund b : F = u^2 ; G = Dx(u_x)\n")
    F, G = sf.backlunds["b"]
    assert G == ScalarExpr.power(Coordinate.jet("u", "xx"))
    assert F == var("u", 2)


def test_bracket_table_and_formal_brackets():
    sf = parse(HEADER + "table t\nbracket [X, Y] = a*Y\nconnection c : A = u*X ; B = [X, Y] ; table = t\n")
    assert sf.table("t").lookup(("X", "Y")) == LieExpr.generator("Y").scale(ScalarExpr.const(param("a")))
    A, B, tname = sf.connections["c"]
    assert B == LieExpr.formal("X", "Y")
    assert tname == "t"


def test_parameter_definitions_and_facts():
    sf = parse("param n\nparam m\nparam s = m - n\nassume m + n != 0\ncase one : n = 1\n")
    a = sf.assumption_set().merged(sf.case("one"))
    assert a.decide(param("s") - param("m") + 1) is Decision.YES
    assert a.decide(param("m") + 1) is Decision.NO


def test_parse_fact_uses_declarations():
    sf = parse(HEADER)
    expr, op, _ = parse_fact(sf, "a - 1 != 0")
    assert op == "!="
    with pytest.raises(ParseError):
        parse_fact(sf, "b = 0")


@pytest.mark.parametrize("source,line,col", [
    (HEADER + "form w = du /\\ dz\n", 5, 16),
    (HEADER + "form w = du $ dt\n", 5, 13),
    (HEADER + "frob w\n", 5, 1),
    (HEADER + "param a\n", 5, 7),
    (HEADER + "form w = (du /\\ dt\n", 5, 19),
])
def test_errors_carry_position(source, line, col):
    with pytest.raises(ParseError) as info:
        parse(source)
    assert (info.value.line, info.value.col) == (line, col)
    assert f"line {line}, column {col}" in str(info.value)


def test_undeclared_identifier_message():
    with pytest.raises(ParseError, match="undeclared identifier 'zeta'"):
        parse(HEADER + "form w = zeta*dx\n")


def test_jet_order_is_capped():
    with pytest.raises(ParseError, match="jet order"):
        parse(HEADER + "backlund b : F = u_xxxx ; G = u\n")
    with pytest.raises(ParseError, match="jet order"):
        parse(HEADER + "backlund b : F = Dx(u_xxx) ; G = u\n")


def test_kind_mismatch_is_reported():
    with pytest.raises(ParseError):
        parse(HEADER + "connection c : A = du ; B = X\n")


def test_comments_and_blank_lines_ignored():
    sf = parse("# heading\n\n" + HEADER + "  # indented comment\n")
    assert sf.name == "demo"
    assert list(sf.generators) == ["X", "Y"]
