import pytest

from edskit.exterior import (DegreeError, DifferentialForm, EliminationError, ExteriorSystem, IdealCertificate,
                             JetSubstitution, check_closed, d, eliminate, ideal_reduce, section, wedge)
from edskit.numeric import random_identity_check
from edskit.scalar import Coordinate, ParamRational, ScalarExpr, param

from conftest import const, jet, var

B = DifferentialForm.basis
n, m, gamma, beta = param("n"), param("m"), param("gamma"), param("beta")


class TestForms:
    def test_repeated_differential_vanishes(self):
        assert wedge(B("u"), B("u")).is_zero()

    def test_canonical_order_and_sign(self):
        assert B("t", "x") == -B("x", "t")
        assert B("u", "t", "x") == -B("x", "t", "u")
        assert B("t", "u", "x") == B("x", "t", "u")

    def test_degree_mismatch(self):
        with pytest.raises(DegreeError):
            B("x") + B("x", "t")

    def test_d_of_function(self):
        f = var("u", 2) * var("p")
        assert d(DifferentialForm.function(f)) == B("u").scale(const(2) * var("u") * var("p")) + B("p").scale(var("u", 2))

    def test_d_squared_on_aux_power(self):
        xi = Coordinate.aux({"u": 1, "q": -1})
        f = DifferentialForm.function(ScalarExpr.power(xi, 1 / beta) * var("p"))
        assert d(d(f)).is_zero()

    def test_render_uses_wedge_token(self):
        assert B("x", "t").scale(var("p")).render(wedge_token=" /\\ ") == "p * dx /\\ dt"


class TestClosure:
    def test_gkdv_certificates(self, gkdv):
        certs = check_closed(gkdv.system())
        assert [c.verified for c in certs] == [True, True, True]
        dalpha3 = certs[2].render_multipliers()
        assert dalpha3["alpha1"] == "(gamma*m - gamma*n)/n*p*u^(m - 2*n) * dx"
        assert dalpha3["alpha2"] == "gamma*u^(m - n) * dx"

    def test_certificate_residual_numerically(self, gkdv):
        sys_ = gkdv.system()
        for cert in check_closed(sys_):
            combo = cert.combination()
            for key, c in cert.target.components():
                check = random_identity_check(c, combo.coefficient(*key), trials=20, seed=1,
                                              assumptions=sys_.assumptions, param_choices={"n": [2, 3, 5]})
                assert check.passed, (cert.label, key)

    def test_ch_one_over_u_multiplier(self, ch):
        certs = check_closed(ch.system())
        assert all(c.verified for c in certs)
        assert certs[1].render_multipliers()["alpha3"] == "-u^(-1) * dx"

    def test_non_closed_system(self):
        alpha = B("u", "t") - B("x", "t").scale(var("p") * var("u"))
        sys_ = ExteriorSystem("open", ("x", "t", "u", "p"), [("alpha", alpha)])
        cert, = check_closed(sys_)
        assert not cert.verified
        assert not cert.residual().is_zero()

    def test_hand_written_certificate(self, gkdv):
        sys_ = gkdv.system()
        cert = IdealCertificate(d(sys_.generator("alpha2")), sys_.generators,
                                [DifferentialForm.zero(1), DifferentialForm.zero(1), -B("x")], sys_.assumptions)
        assert cert.verified

    def test_reduce_member_of_ideal(self, gkdv):
        sys_ = gkdv.system()
        target = wedge(B("q"), sys_.generator("alpha1")) + wedge(B("x").scale(var("u")), sys_.generator("alpha2"))
        assert ideal_reduce(target, sys_).verified


class TestSectioning:
    def test_gkdv_residuals(self, gkdv):
        r = section(gkdv.system())
        assert r[0] == const(n) * var("u", n - 1) * jet("u", "x") - var("p")
        assert r[1] == jet("p", "x") - var("q")

    def test_gkdv_equation(self, gkdv):
        sys_ = gkdv.system()
        a = sys_.assumptions
        pde = eliminate([x.apply(a) for x in section(sys_)]).apply(a)
        un = var("u", n)
        expected = (jet("u", "t") + un.total_diff("x").total_diff("x").total_diff("x")
                    + const(n * gamma / m) * var("u", m).total_diff("x"))
        assert pde == expected

    def test_ch_equation_in_rho(self, ch):
        pde = eliminate(section(ch.system()))
        u = var("u")
        rho = u - jet("u", "xx")
        assert pde == rho.total_diff("t") + rho.total_diff("x") * u + const(beta) * rho * jet("u", "x")

    def test_custom_substitution_must_be_horizontal(self):
        with pytest.raises(ValueError):
            JetSubstitution({"u": B("u")})

    def test_elimination_needs_one_leftover(self):
        with pytest.raises(EliminationError):
            eliminate([jet("u", "t"), jet("p", "t")])
