"""Float evaluation oracle used to cross-check symbolic identities."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .scalar import AssumptionSet, Coordinate, ParamRational, ScalarExpr, _sx

COORD_RANGE = (500, 1500)      # coordinates drawn from [1/2, 3/2] in steps of 1/1000
PARAM_RANGE = range(-5, 6)
ABS_FLOOR = 1e-12


class DomainError(ValueError):
    pass


@dataclass
class EvalPoint:
    coordinates: dict = field(default_factory=dict)    # name -> Fraction | float
    parameters: dict = field(default_factory=dict)     # name -> Fraction

    def coordinate_value(self, c: Coordinate):
        if c.kind == "aux":
            return sum(Fraction(k) * _as_fraction_or_float(self.coordinates[name]) for name, k in c.definition)
        try:
            return self.coordinates[c.name]
        except KeyError:
            raise KeyError(f"no value for coordinate {c.name}") from None


def _as_fraction_or_float(v):
    return v if isinstance(v, float) else Fraction(v)


def _power(base, e: Fraction):
    if e.denominator == 1:
        if base == 0 and e < 0:
            raise ZeroDivisionError("zero raised to a negative power")
        return base ** int(e) if isinstance(base, Fraction) else float(base) ** int(e)
    if base < 0:
        raise DomainError(f"negative base {float(base)} with fractional exponent {e}")
    if base == 0:
        return 0.0
    return math.exp(float(e) * math.log(float(base)))


def evaluate(e, p: EvalPoint) -> float:
    """Termwise evaluation; exact while every power is integral, float otherwise."""
    e = _sx(e)
    total = Fraction(0)
    inexact = 0.0
    params: dict = {}
    bases: dict = {}
    for t in e.terms():
        value = t.coeff.evaluate(p.parameters)
        exact = True
        for c, x in t.powers:
            if c not in bases:
                bases[c] = p.coordinate_value(c)
            if x not in params:
                params[x] = x.evaluate(p.parameters)
            factor = _power(bases[c], params[x])
            if isinstance(factor, float):
                exact = False
                value = float(value) * factor
            else:
                value = value * factor
        if exact and isinstance(value, Fraction):
            total += value
        else:
            inexact += float(value)
    return float(total) + inexact


eval = evaluate


def symbols_of(exprs: Iterable) -> tuple[set, set]:
    coords, params = set(), set()
    for e in exprs:
        e = _sx(e)
        for c in e.coordinates():
            if c.kind == "aux":
                coords.update(name for name, _ in c.definition)
            else:
                coords.add(c.name)
        params |= set(e.parameters())
    return coords, params


def sample_parameters(rng: random.Random, names: Iterable[str], assumptions: AssumptionSet | None = None,
                      choices: Mapping[str, Iterable] | None = None, fixed: Mapping | None = None,
                      attempts: int = 200) -> dict:
    """Small integers respecting nonzero flags and disequalities (equalities are substituted)."""
    a = assumptions or AssumptionSet()
    fixed = {k: Fraction(v) for k, v in (fixed or {}).items()}
    subst = a.substitution
    wanted = set(names) | {v for rhs in subst.values() for v in rhs.variables()}
    wanted |= {v for e in a.disequalities for v in e.variables()}
    free = sorted(n for n in wanted if n not in subst and n not in fixed)
    for _ in range(attempts):
        values = dict(fixed)
        for name in free:
            pool = list((choices or {}).get(name, PARAM_RANGE))
            if name in a.nonzero_params:
                pool = [v for v in pool if v != 0]
            if not pool:
                raise ValueError(f"no admissible values for parameter {name}")
            values[name] = Fraction(rng.choice(pool))
        try:
            for name, rhs in subst.items():
                values[name] = rhs.evaluate(values)
            if all(d.evaluate(values) != 0 for d in a.disequalities) and \
                    all(values[n] != 0 for n in a.nonzero_params if n in values):
                return values
        except (ZeroDivisionError, KeyError):
            continue
    raise ValueError("could not sample parameters satisfying the assumptions")


def sample_point(rng: random.Random, coords: Iterable[str], exprs: Iterable = (), params: Mapping | None = None,
                 attempts: int = 200) -> EvalPoint:
    """Coordinates uniform on [1/2, 3/2]; resample until every composite base is positive."""
    auxes = {c for e in exprs for c in _sx(e).coordinates() if c.kind == "aux"}
    coords = sorted(coords)
    for _ in range(attempts):
        values = {name: Fraction(rng.randint(*COORD_RANGE), 1000) for name in coords}
        p = EvalPoint(values, dict(params or {}))
        if all(p.coordinate_value(c) > 0 for c in auxes):
            return p
    raise ValueError("could not sample a point with positive composite bases")


@dataclass
class IdentityCheck:
    passed: bool
    worst_error: float
    worst_point: EvalPoint | None
    trials: int
    seed: int


def random_identity_check(lhs, rhs, trials: int = 20, seed: int = 0, tol: float = 1e-9,
                          assumptions: AssumptionSet | None = None, param_choices: Mapping | None = None,
                          fixed: Mapping | None = None) -> IdentityCheck:
    """Compare two expressions at seeded random points.

    A sample passes when ``|l - r| <= max(tol * max(|l|, |r|), 1e-12)``.
    """
    lhs, rhs = _sx(lhs), _sx(rhs)
    coords, params = symbols_of([lhs, rhs])
    rng = random.Random(seed)
    worst, worst_p, ok = 0.0, None, True
    for _ in range(trials):
        pv = sample_parameters(rng, params, assumptions, param_choices, fixed)
        point = sample_point(rng, coords, [lhs, rhs], pv)
        lv, rv = evaluate(lhs, point), evaluate(rhs, point)
        err = abs(lv - rv)
        bound = max(tol * max(abs(lv), abs(rv)), ABS_FLOOR)
        rel = err / max(abs(lv), abs(rv), ABS_FLOOR)
        if rel > worst or worst_p is None:
            worst, worst_p = rel, point
        if err > bound:
            ok = False
    return IdentityCheck(ok, worst, worst_p, trials, seed)
