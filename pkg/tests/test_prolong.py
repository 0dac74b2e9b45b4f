import pytest

from edskit.liealg import LieExpr, RelationTable
from edskit.prolong import (Connection, constraints_equivalent, curvature_residual, extract_constraints,
                            pde_form_check, verify_case)
from edskit.scalar import CaseSplitError, param

from conftest import const, var

X = LieExpr.generator
n, m, gamma = param("n"), param("m"), param("gamma")


def conn(sf, name):
    A, B, tname = sf.connections[name]
    return Connection(name, A, B, sf.table(tname))


def test_connection_rejects_base_dependence():
    with pytest.raises(ValueError):
        Connection("bad", X("X").scale(var("x")), LieExpr())


def test_case_i_connection_is_flat(gkdv):
    result = curvature_residual(conn(gkdv, "case_i"), gkdv.system())
    assert result.zero


def test_printed_case_i_connection_leaves_gamma_terms(gkdv):
    result = curvature_residual(conn(gkdv, "case_i_printed"), gkdv.system())
    assert not result.zero
    (key, c), = result.residual.components()
    assert key == ("x", "t")
    # the leftover is twice the gamma-dependent part of B times p
    assert c.render() == "((2*gamma*n + 2*gamma)*p*u^(m) + 2*gamma*sigma*p*u^(m - n))*X"


def test_ch_connections_are_flat(ch):
    for name in ("one_generator", "two_generator"):
        assert curvature_residual(conn(ch, name), ch.system()).zero, name


def test_two_generator_needs_commuting_generators(ch):
    A, B, _ = ch.connections["two_generator"]
    free = Connection("two_generator_free", A, B, RelationTable())
    assert not curvature_residual(free, ch.system()).zero


def test_pde_form_on_u_only(gkdv):
    report = pde_form_check(conn(gkdv, "u_only"), gkdv.system())
    assert not report.passed
    assert curvature_residual(conn(gkdv, "u_only"), gkdv.system()).zero is False


def test_pde_form_labels_match_the_free_jets(gkdv):
    report = pde_form_check(conn(gkdv, "family_printed"), gkdv.system())
    assert [e.label for e in report.equations][:3] == ["[p_t]", "[q_t]", "[q_x]"]
    assert all(e.passed for e in report.equations[:3])


def test_free_pair_keeps_formal_bracket(gkdv):
    result = curvature_residual(conn(gkdv, "free_pair"), gkdv.system())
    assert result.residual.coefficient("x", "t") == LieExpr.formal("X1", "X2")


def test_case_i_extraction_has_seven_relations(gkdv):
    a = gkdv.case("i")
    found = extract_constraints(conn(gkdv, "family"), gkdv.system(), a)
    assert len(found) == 7
    assert sorted(c.exponent.render() for c in found.constraints) == sorted(
        ["0", "1", "m", "n", "n + 1", "n + 2", "2*n + 2"])


def test_short_case_list_requires_a_split(gkdv):
    with pytest.raises(CaseSplitError) as info:
        extract_constraints(conn(gkdv, "family"), gkdv.system(), gkdv.case("i_short"))
    rendered = {d.render() for d in info.value.differences}
    assert rendered & {"n + 2", "2*n + 1", "m - 2*n - 2", "-n - 2", "-2*n - 1", "-m + 2*n + 2"}


@pytest.mark.parametrize("case", ["iii", "iv", "v", "vi"])
def test_corrected_relations_match_extraction(gkdv, case):
    found = extract_constraints(conn(gkdv, "family"), gkdv.system(), gkdv.case(case))
    ok, extra, missing = constraints_equivalent(found, gkdv.relations[f"case_{case}"], found.assumptions,
                                                gkdv.tables["standing"])
    assert ok, (extra, missing)


def test_case_ii_merges_two_powers_but_keeps_the_realization(gkdv):
    found = extract_constraints(conn(gkdv, "family"), gkdv.system(), gkdv.case("ii"))
    # with n = 1 the u and u^n groups coincide: [X2, X4] - [X1, X5] = 0
    assert len(found) == 6
    assert verify_case(found, gkdv.tables["standing"], gkdv.realizations["case_i"]).verified


def test_case_i_realization_closes(gkdv):
    found = extract_constraints(conn(gkdv, "family"), gkdv.system(), gkdv.case("i"))
    report = verify_case(found, gkdv.tables["standing"], gkdv.realizations["case_i"])
    assert report.verified


@pytest.mark.parametrize("case,realization", [("iv", "case_iv"), ("vi", "case_vi")])
def test_three_element_realizations(gkdv, case, realization):
    found = extract_constraints(conn(gkdv, "family"), gkdv.system(), gkdv.case(case))
    report = verify_case(found, gkdv.tables["standing"], gkdv.realizations[realization])
    assert report.verified
    assert "[X1, X2] = X7" in report.final_table.render()


def test_case_iii_realization_forces_x7_to_vanish(gkdv):
    found = extract_constraints(conn(gkdv, "family"), gkdv.system(), gkdv.case("iii"))
    report = verify_case(found, gkdv.tables["standing"], gkdv.realizations["case_iii"])
    assert report.constraints_satisfied
    assert not report.table_consistent


def test_printed_family_has_leftover_p_terms(gkdv):
    found = extract_constraints(conn(gkdv, "family_printed"), gkdv.system(), gkdv.case("iv"))
    assert any(c.monomial == "p" for c in found.constraints)


def test_printed_case_iv_realization_breaks_standing_table(gkdv):
    printed = gkdv.relations["case_iv_printed"]
    a = gkdv.assumption_set().merged(gkdv.case("iv"))
    report = verify_case(printed, gkdv.tables["standing"], gkdv.realizations["case_iv_printed"], a)
    assert report.constraints_satisfied
    assert not report.table_consistent
    # with X3 -> 0 in place of X2 -> X3 the printed list and the standing table are both met
    assert verify_case(printed, gkdv.tables["standing"], gkdv.realizations["case_iv_x3_zero"], a).verified
