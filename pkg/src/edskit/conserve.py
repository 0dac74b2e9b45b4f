"""Conservation laws as exact two-forms in the ring of the system."""

from __future__ import annotations

from dataclasses import dataclass

from .exterior import DifferentialForm, ExteriorSystem, check_closed, d
from .scalar import AssumptionSet, Decision, _sx, is_zero


@dataclass
class ConservationCandidate:
    name: str
    multipliers: list                       # ScalarExpr per generator
    omega: DifferentialForm | None = None
    extra_coordinate: str | None = None     # gauge coordinate v, if declared


@dataclass
class ExactnessCheck:
    holds: bool
    residual: DifferentialForm


def build_theta(g, sys: ExteriorSystem) -> DifferentialForm:
    if len(g) != len(sys.generators):
        raise ValueError(f"{len(g)} multipliers for {len(sys.generators)} generators")
    degree = sys.forms[0].degree if sys.generators else 2
    theta = DifferentialForm.zero(degree)
    for gi, alpha in zip(g, sys.forms):
        theta = theta + alpha.scale(_sx(gi))
    return theta


def _vanishes(f: DifferentialForm, a: AssumptionSet | None) -> bool:
    return all(is_zero(c, a) == Decision.YES for _, c in f.components())


def check_exact(theta: DifferentialForm, assumptions: AssumptionSet | None = None) -> ExactnessCheck:
    r = d(theta).apply(assumptions)
    return ExactnessCheck(_vanishes(r, assumptions), r)


def check_potential(omega: DifferentialForm, theta: DifferentialForm,
                    assumptions: AssumptionSet | None = None) -> ExactnessCheck:
    if omega.degree != 1:
        raise ValueError("potential must be a one-form")
    r = (d(omega) - theta).apply(assumptions)
    return ExactnessCheck(_vanishes(r, assumptions), r)


def extended_system(sys: ExteriorSystem, omega: DifferentialForm, coordinate: str = "v") -> ExteriorSystem:
    """Adjoin the gauge coordinate and ``dv + omega`` (kept as a two-form through ``d``) to the chart.

    The one-form itself has degree 1; the closure question concerns the ideal
    generated by the original forms together with ``d(dv + omega) = d omega``.
    """
    w = DifferentialForm.basis(coordinate) + omega
    return sys.extended(coordinate, [("omega", w)])


def check_extended_closure(sys: ExteriorSystem, omega: DifferentialForm, coordinate: str = "v",
                           assumptions: AssumptionSet | None = None) -> list:
    return check_closed(extended_system(sys, omega, coordinate), assumptions)
