"""Bäcklund pairs ``y_x = F``, ``y_t = G`` and their potential equation."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .numeric import COORD_RANGE, evaluate, EvalPoint
from .scalar import Coordinate, ParamRational, ScalarExpr, _sx

U = Coordinate("u")
U_T = Coordinate.jet("u", "t")
Y_X = Coordinate.jet("y", "x")
Y_XX = Coordinate.jet("y", "xx")
Y_XXX = Coordinate.jet("y", "xxx")
Y_T = Coordinate.jet("y", "t")


@dataclass
class BacklundSystem:
    name: str
    F: ScalarExpr
    G: ScalarExpr
    pde: ScalarExpr
    parameters: dict = field(default_factory=dict)

    def subs_params(self, mapping) -> "BacklundSystem":
        return BacklundSystem(self.name, self.F.subs_params(mapping), self.G.subs_params(mapping),
                              self.pde.subs_params(mapping), self.parameters)


def divide_by_pde(r: ScalarExpr, pde: ScalarExpr, lead: Coordinate = U_T):
    """``r = lam * pde + rem`` with ``rem`` free of ``lead``; ``pde`` must be ``lead + ...``."""
    rest = pde - ScalarExpr.power(lead)
    if any(lead in {c for c, _ in t.powers} for t in rest.terms()):
        raise ValueError(f"residual is not of the form {lead.name} + (terms free of {lead.name})")
    lam = ScalarExpr()
    for _ in range(64):
        hits = [t for t in r.terms() if t.exponent(lead) != 0]
        if not hits:
            return lam, r
        step = ScalarExpr()
        for t in hits:
            e = t.exponent(lead)
            if not e.is_nonneg_integer():
                raise ValueError(f"{lead.name} occurs with exponent {e.render()}")
            reduced = tuple((c, x - 1) if c == lead else (c, x) for c, x in t.powers)
            step = step + ScalarExpr({tuple((c, x) for c, x in reduced if not x.is_zero()): t.coeff})
        lam = lam + step
        r = r - step * pde
    raise RuntimeError("division did not terminate")


def compatibility_residual(b: BacklundSystem):
    """``(multiplier, remainder)`` with ``D_t F - D_x G = multiplier * P + remainder``."""
    r = b.F.total_diff("t") - b.G.total_diff("x")
    return divide_by_pde(r, b.pde)


def potential_equation(n, m, gamma, alpha, mutate: bool = False) -> ScalarExpr:
    """Left side of the potential equation in the jets of ``y`` (``kappa = sigma = 0``).

    ``mutate`` flips the sign of the squared-derivative term.
    """
    n, m, gamma, alpha = (ParamRational.of(v) for v in (n, m, gamma, alpha))
    w = ScalarExpr.power(Y_X, n / (n + 1))
    wx = w.total_diff("x")
    wxx = wx.total_diff("x")
    half = ScalarExpr.const((n + 1) / 2)
    square = half * wx * wx
    return (ScalarExpr.power(Y_T) + ScalarExpr.const(n + 1) * w * wxx
            + (square if mutate else -square)
            - ScalarExpr.const(n * (n + 1) / (m + n) * gamma) * ScalarExpr.power(Y_X, (m + n) / (n + 1))
            - ScalarExpr.const(alpha))


@dataclass
class PotentialReport:
    passed: bool
    worst: float
    worst_sample: dict
    trials: int
    seed: int
    tol: float
    residuals: list


def verify_potential_equation(b: BacklundSystem, n_val, m_val, gamma_val, alpha_val, trials: int = 20,
                              seed: int = 0, tol: float = 1e-9, mutate: bool = False,
                              equation: ScalarExpr | None = None) -> PotentialReport:
    """Sample y-jets with ``y_x > 0``, recover ``u`` from ``u = y_x^(1/(n+1))``, set ``y_t = G``
    and evaluate the potential equation."""
    n_val, m_val, gamma_val, alpha_val = (Fraction(v) for v in (n_val, m_val, gamma_val, alpha_val))
    if n_val + 1 == 0:
        raise ValueError("n + 1 must be nonzero")
    values = {"n": n_val, "m": m_val, "gamma": gamma_val, "alpha": alpha_val, "sigma": Fraction(0),
              "kappa": Fraction(0)}
    bs = b.subs_params({k: ParamRational.of(v) for k, v in values.items()})
    eq = equation if equation is not None else potential_equation(n_val, m_val, gamma_val, alpha_val, mutate)

    u_of_y = ScalarExpr.power(Y_X, ParamRational.of(1 / (n_val + 1)))
    u_jets = {Coordinate("u"): u_of_y}
    cur = u_of_y
    for idx in ("x", "xx"):
        cur = cur.total_diff("x")
        u_jets[Coordinate.jet("u", idx)] = cur

    rng = random.Random(seed)
    worst, worst_sample, ok, residuals = 0.0, {}, True, []
    for _ in range(trials):
        y = {c.name: Fraction(rng.randint(*COORD_RANGE), 1000) for c in (Y_X, Y_XX, Y_XXX)}
        y[Y_XX.name] -= 1
        y[Y_XXX.name] -= 1
        p = EvalPoint(dict(y), values)
        coords = {c.name: evaluate(e, p) for c, e in u_jets.items()}
        yt = evaluate(bs.G, EvalPoint(coords, values))
        p.coordinates[Y_T.name] = yt
        lhs = evaluate(eq, p)
        scale = max(abs(yt), abs(evaluate(eq - ScalarExpr.power(Y_T), p)), 1.0)
        rel = abs(lhs) / scale
        residuals.append(rel)
        if rel > worst or not worst_sample:
            worst, worst_sample = rel, {**{k: float(v) for k, v in y.items()}, Y_T.name: yt}
        if abs(lhs) > max(tol * scale, 1e-12):
            ok = False
    return PotentialReport(ok, worst, worst_sample, trials, seed, tol, residuals)
