import pytest

from edskit.conserve import build_theta, check_exact, check_extended_closure, check_potential, extended_system
from edskit.exterior import DifferentialForm, check_closed
from edskit.scalar import ScalarExpr

from conftest import var


def candidate(sf, name):
    g, omega = sf.conservations[name]
    sys_ = sf.system()
    return sys_, build_theta(g, sys_), omega


def test_gkdv_theta_is_exact_with_potential(gkdv):
    sys_, theta, omega = candidate(gkdv, "theta")
    assert check_exact(theta, sys_.assumptions).holds
    assert check_potential(omega, theta, sys_.assumptions).holds


def test_alpha3_alone_is_not_exact(gkdv):
    sys_, theta, _ = candidate(gkdv, "no_potential")
    result = check_exact(theta, sys_.assumptions)
    assert not result.holds
    assert not result.residual.is_zero()


def test_ch_theta_exact_for_every_beta(ch):
    sys_, theta, _ = candidate(ch, "printed")
    assert check_exact(theta, sys_.assumptions).holds


def test_ch_printed_potential_misses_a_p_squared_term(ch):
    sys_, theta, omega = candidate(ch, "printed")
    result = check_potential(omega, theta, sys_.assumptions)
    assert not result.holds
    assert result.residual == DifferentialForm.basis("t", "p").scale(-ScalarExpr.const("beta") * var("p"))
    _, _, corrected = candidate(ch, "corrected")
    assert check_potential(corrected, theta, sys_.assumptions).holds


@pytest.mark.parametrize("file,name", [("gkdv", "theta"), ("ch", "corrected")])
def test_gauge_shift_keeps_verdicts(file, name, request):
    sf = request.getfixturevalue(file)
    sys_, theta, omega = candidate(sf, name)
    shifted = omega + DifferentialForm.basis("v")
    assert check_potential(shifted, theta, sys_.assumptions).holds
    assert check_potential(omega.scale(ScalarExpr.const(2)), theta, sys_.assumptions).holds is False


@pytest.mark.parametrize("file,name,ok", [("gkdv", "theta", True), ("ch", "corrected", True), ("ch", "printed", False)])
def test_extended_chart_closure(file, name, ok, request):
    sf = request.getfixturevalue(file)
    sys_, _, omega = candidate(sf, name)
    certs = check_extended_closure(sys_, omega, "v", sys_.assumptions)
    assert all(c.verified for c in certs) is ok
    assert "v" in extended_system(sys_, omega).coordinates


def test_multiplier_count_must_match(gkdv):
    with pytest.raises(ValueError):
        build_theta([ScalarExpr.const(1)], gkdv.system())
