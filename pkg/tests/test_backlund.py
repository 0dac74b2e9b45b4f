"""Backlund pair checks, with sympy as an independent calculus oracle."""

import random

import pytest
import sympy

from edskit.backlund import (BacklundSystem, compatibility_residual, divide_by_pde, potential_equation,
                             verify_potential_equation)
from edskit.exterior import eliminate, section
from edskit.numeric import EvalPoint, evaluate
from edskit.scalar import ScalarExpr, param

from conftest import const, jet, var

n, m, gamma, sigma = param("n"), param("m"), param("gamma"), param("sigma")


def pair(sf, name):
    sys_ = sf.system()
    a = sys_.assumptions
    pde = eliminate([r.apply(a) for r in section(sys_)]).apply(a)
    F, G = sf.backlunds[name]
    return BacklundSystem(name, F, G, pde), a


def sympy_remainder(sign: int, nv: int, mv: int, gv: int, sv: int, kv: int, av: int):
    """D_t F - D_x G on solutions, computed with sympy from scratch."""
    x, t = sympy.symbols("x t")
    u = sympy.Function("u")(x, t)
    F = kv + sv * u + u ** (nv + 1)
    un = u ** nv
    G = (-(sv + (nv + 1) * u ** nv) * sympy.diff(un, x, 2) + sympy.Rational(nv + 1, 2) * sympy.diff(un, x) ** 2
         + sign * (sympy.Rational(nv, mv) * gv * sv * u ** mv
                   + sympy.Rational(nv * (nv + 1), mv + nv) * gv * u ** (mv + nv)) + av)
    ut = -sympy.diff(un, x, 3) - gv * nv * u ** (mv - 1) * sympy.diff(u, x)
    expr = sympy.diff(F, t) - sympy.diff(G, x)
    expr = expr.subs(sympy.Derivative(u, t), ut)
    return sympy.simplify(sympy.expand(expr))


def test_corrected_pair_is_compatible(gkdv):
    b, a = pair(gkdv, "corrected")
    lam, rem = compatibility_residual(b)
    assert rem.apply(a).is_zero()
    assert lam.apply(a) == const(sigma) + const(n + 1) * var("u", n)


def test_printed_pair_leaves_gamma_remainder(gkdv):
    b, a = pair(gkdv, "printed")
    lam, rem = compatibility_residual(b)
    assert lam.apply(a) == const(sigma) + const(n + 1) * var("u", n)
    expected = (const(-2 * gamma * n) * const(sigma) * var("u", m - 1)
                - const(2 * gamma * n * (n + 1)) * var("u", m + n - 1)) * jet("u", "x")
    assert rem.apply(a) == expected


@pytest.mark.parametrize("nv,mv", [(1, 2), (2, 3), (2, 5), (3, 2)])
def test_sympy_oracle_agrees(nv, mv):
    assert sympy_remainder(-1, nv, mv, 6, 2, 1, 3) == 0
    assert sympy_remainder(+1, nv, mv, 6, 2, 1, 3) != 0


def test_remainder_numerically_at_seeded_points(gkdv):
    b, a = pair(gkdv, "corrected")
    lam, rem = compatibility_residual(b)
    lhs = b.F.total_diff("t") - b.G.total_diff("x")
    rhs = lam * b.pde + rem
    rng = random.Random(7)
    for _ in range(20):
        params = {"n": rng.choice([1, 2, 3]), "m": rng.choice([2, 3, 4]), "gamma": rng.choice([-2, 3, 6]),
                  "sigma": rng.randint(-3, 3), "kappa": rng.randint(-3, 3), "alpha": rng.randint(-3, 3)}
        params["s"] = params["m"] - params["n"]
        coords = {name: rng.uniform(0.5, 1.5) for name in
                  ("u", "u_x", "u_xx", "u_xxx", "u_t", "u_xt", "u_xxt")}
        coords.update({"u_xxxx": 0.0})
        p = EvalPoint(coords, {k: v for k, v in params.items()})
        lv, rv = evaluate(lhs, p), evaluate(rhs, p)
        assert abs(lv - rv) <= 1e-9 * max(abs(lv), abs(rv), 1.0)


def test_division_requires_normalized_lead(gkdv):
    with pytest.raises(ValueError):
        divide_by_pde(jet("u", "t"), jet("u", "t") * var("u") + var("u"))


def test_potential_equation_passes_for_printed_pair(gkdv):
    b, _ = pair(gkdv, "printed")
    report = verify_potential_equation(b, 1, 2, 6, 0, trials=20, seed=0, tol=1e-9)
    assert report.passed
    assert report.worst < 1e-9


def test_potential_equation_catches_sign_mutation(gkdv):
    b, _ = pair(gkdv, "printed")
    report = verify_potential_equation(b, 1, 2, 6, 0, trials=20, seed=0, tol=1e-9, mutate=True)
    assert not report.passed


def test_potential_report_is_deterministic(gkdv):
    b, _ = pair(gkdv, "printed")
    r1 = verify_potential_equation(b, 2, 3, 1, 1, trials=5, seed=3)
    r2 = verify_potential_equation(b, 2, 3, 1, 1, trials=5, seed=3)
    assert r1.residuals == r2.residuals


def test_potential_equation_shape():
    eq = potential_equation(1, 2, 6, 0)
    assert ScalarExpr.power(eq.coordinates().__iter__().__next__()) is not None
    assert any(c.name == "y_t" for c in eq.coordinates())
