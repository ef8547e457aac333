"""Fixed-time convergence bounds for V' <= -c1*V^a1 - c2*V^a2 + c3.

Closed-form estimates of the convergence domain (a sublevel set of V)
and of the settling time to that domain, for a scalar Lyapunov
differential inequality with exponents a1 = 1 + 1/mu and a2 = 1 - 1/mu,
together with a fixed-step RK4 oracle that integrates the scalar ODE
directly and serves as an independent check on the closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

from numba import njit

from .errors import (
    DegenerateBoundError,
    ParameterError,
    PreconditionError,
    SettleTimeoutError,
)

__all__ = [
    "FxtsParams",
    "Regime",
    "BoundVariant",
    "TimeBound",
    "IntegralBound",
    "ConvergenceEstimate",
    "classify_regime",
    "domain_bound",
    "settling_time_bound",
    "lemma3_integral_bound",
    "numeric_settling_time",
    "robust_margin",
    "convergence_estimate",
    "supercritical_report",
]


class Regime(Enum):
    """Sign regime of the additive constant c3 relative to 2*sqrt(c1*c2)."""

    NON_POSITIVE = "non_positive"  # c3 <= 0
    SUBCRITICAL = "subcritical"  # 0 < c3 < 2*sqrt(c1*c2)
    SUPERCRITICAL = "supercritical"  # c3 >= 2*sqrt(c1*c2)


class BoundVariant(Enum):
    """Which arctan offset is used in the subcritical settling time.

    The two published forms disagree: THEOREM_K2 uses
    k2 = -c3/sqrt(4*c1*c2 - c3^2) and LEMMA_K2 uses
    k2 = (2*c1 - c3)/sqrt(4*c1*c2 - c3^2).  Both are exposed;
    LEMMA_K2 is the default (it is the tighter of the two).
    """

    THEOREM_K2 = "theorem_k2"
    LEMMA_K2 = "lemma_k2"


@dataclass(frozen=True)
class FxtsParams:
    """Coefficients of the Lyapunov differential inequality.

    c1, c2 > 0 weight the superlinear and sublinear decay terms,
    c3 is the additive (disturbance-induced) constant, mu > 1 sets the
    exponents a1 = 1 + 1/mu, a2 = 1 - 1/mu, and k > 1 is the margin
    used only in the supercritical domain estimate.
    """

    c1: float
    c2: float
    c3: float
    mu: float
    k: float = 1.05

    def __post_init__(self) -> None:
        if not (self.c1 > 0 and self.c2 > 0):
            raise ParameterError(f"c1, c2 must be positive, got {self.c1}, {self.c2}")
        if not self.mu > 1:
            raise ParameterError(f"mu must exceed 1, got {self.mu}")
        if not self.k > 1:
            raise ParameterError(f"k must exceed 1, got {self.k}")
        if not math.isfinite(self.c3):
            raise ParameterError(f"c3 must be finite, got {self.c3}")

    @property
    def a1(self) -> float:
        return 1.0 + 1.0 / self.mu

    @property
    def a2(self) -> float:
        return 1.0 - 1.0 / self.mu

    @property
    def critical_c3(self) -> float:
        return 2.0 * math.sqrt(self.c1 * self.c2)


class TimeBound(NamedTuple):
    """A settling-time bound plus a pointwise validity flag.

    ``valid`` is False only in the supercritical regime when the printed
    closed form evaluates to a non-positive number and therefore cannot
    bound a positive convergence time.
    """

    value: float
    valid: bool
    regime: Regime


class IntegralBound(NamedTuple):
    """Closed-form upper bound on the settling integral, with validity."""

    value: float
    valid: bool


@dataclass(frozen=True)
class ConvergenceEstimate:
    """Convergence domain level and settling-time bound for one parameter set."""

    domain_level: float
    time_bound: float  # may be math.inf when the closed form is unusable
    regime: Regime
    time_bound_valid: bool = True


def classify_regime(p: FxtsParams) -> Regime:
    """Classify c3 against the critical value 2*sqrt(c1*c2).

    The boundary c3 == 2*sqrt(c1*c2) is assigned to SUPERCRITICAL.
    """
    if p.c3 <= 0:
        return Regime.NON_POSITIVE
    if p.c3 < p.critical_c3:
        return Regime.SUBCRITICAL
    return Regime.SUPERCRITICAL


def _supercritical_roots(p: FxtsParams) -> tuple[float, float]:
    """Roots a <= b of c1*s^2 - c3*s + c2 = 0 (requires c3 >= 2*sqrt(c1*c2))."""
    disc = p.c3 * p.c3 - 4.0 * p.c1 * p.c2
    sq = math.sqrt(max(disc, 0.0))
    a = (p.c3 - sq) / (2.0 * p.c1)
    b = (p.c3 + sq) / (2.0 * p.c1)
    return a, b


def domain_bound(p: FxtsParams) -> float:
    """Sublevel value of V defining the convergence domain.

    0 when c3 <= 0 (convergence to the origin itself);
    c3/(2*sqrt(c1*c2)) in the subcritical regime;
    k * b^mu in the supercritical regime, b being the larger root of
    c1*s^2 - c3*s + c2.
    """
    regime = classify_regime(p)
    if regime is Regime.NON_POSITIVE:
        return 0.0
    if regime is Regime.SUBCRITICAL:
        return p.c3 / p.critical_c3
    _, b = _supercritical_roots(p)
    return p.k * b**p.mu


def settling_time_bound(
    p: FxtsParams, variant: BoundVariant = BoundVariant.LEMMA_K2
) -> TimeBound:
    """Closed-form upper bound on the time to reach the convergence domain.

    Non-positive c3 gives mu*pi/(2*sqrt(c1*c2)).  Subcritical c3 gives
    (mu/(c1*k1))*(pi/2 - atan(k2)) with k2 depending on ``variant``.
    Supercritical c3 gives (mu/(c1*(b-a)))*log((k*b-b)/(k*b-a)); that
    expression is non-positive whenever a < b, so it is returned raw
    with ``valid=False`` in that case and the numeric oracle should be
    consulted instead.
    """
    regime = classify_regime(p)
    if regime is Regime.NON_POSITIVE:
        return TimeBound(p.mu * math.pi / p.critical_c3, True, regime)

    if regime is Regime.SUBCRITICAL:
        root = math.sqrt(4.0 * p.c1 * p.c2 - p.c3 * p.c3)
        k1 = root / (2.0 * p.c1)
        if variant is BoundVariant.THEOREM_K2:
            k2 = -p.c3 / root
        else:
            k2 = (2.0 * p.c1 - p.c3) / root
        value = (p.mu / (p.c1 * k1)) * (math.pi / 2.0 - math.atan(k2))
        return TimeBound(value, True, regime)

    a, b = _supercritical_roots(p)
    if b - a < 1e-14 * max(1.0, b):
        raise DegenerateBoundError(
            "repeated roots of c1*s^2 - c3*s + c2; supercritical bound degenerates"
        )
    value = (p.mu / (p.c1 * (b - a))) * math.log((p.k * b - b) / (p.k * b - a))
    return TimeBound(value, value > 0.0, regime)


def lemma3_integral_bound(p: FxtsParams, V0: float) -> IntegralBound:
    """Closed-form upper bound on I = int_{V0}^{Vbar} dV / (-c1 V^a1 - c2 V^a2 + c3).

    Case (i), 0 < c3 < 2*sqrt(c1*c2): Vbar = 1 and V0 >= 1 is required.
    Case (ii), c3 >= 2*sqrt(c1*c2): Vbar = k*b^mu and V0 >= Vbar is
    required; the printed value is non-positive for a < b, so it is
    returned with ``valid=False`` in that case.
    """
    regime = classify_regime(p)
    if regime is Regime.NON_POSITIVE:
        raise PreconditionError("integral bound requires c3 > 0")

    if regime is Regime.SUBCRITICAL:
        if V0 < 1.0:
            raise PreconditionError(f"subcritical case requires V0 >= 1, got {V0}")
        return IntegralBound(
            settling_time_bound(p, BoundVariant.LEMMA_K2).value, True
        )

    vbar = domain_bound(p)
    if V0 < vbar:
        raise PreconditionError(
            f"supercritical case requires V0 >= {vbar:.6g}, got {V0}"
        )
    tb = settling_time_bound(p)
    return IntegralBound(tb.value, tb.valid)


@njit(cache=True)
def _rhs(v, c1, c2, c3, a1, a2):
    if v <= 0.0:
        return c3
    return -c1 * v**a1 - c2 * v**a2 + c3


@njit(cache=True)
def _rk4(v, h, c1, c2, c3, a1, a2):
    k1 = _rhs(v, c1, c2, c3, a1, a2)
    k2 = _rhs(v + 0.5 * h * k1, c1, c2, c3, a1, a2)
    k3 = _rhs(v + 0.5 * h * k2, c1, c2, c3, a1, a2)
    k4 = _rhs(v + h * k3, c1, c2, c3, a1, a2)
    return v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@njit(cache=True)
def _settle(v0, level, dt, t_max, c1, c2, c3, a1, a2, v_tol):
    """Integrate until V <= level; returns crossing time or -1.0 on timeout."""
    t = 0.0
    v = v0
    while t < t_max:
        v_next = _rk4(v, dt, c1, c2, c3, a1, a2)
        if v_next <= level:
            # bisect the partial step to localize the crossing
            lo = 0.0
            hi = dt
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                vm = _rk4(v, mid, c1, c2, c3, a1, a2)
                if vm <= level:
                    hi = mid
                else:
                    lo = mid
                if abs(vm - level) <= v_tol:
                    return t + mid
            return t + hi
        v = v_next
        t += dt
    return -1.0


def numeric_settling_time(
    p: FxtsParams,
    V0: float,
    dt: float = 1e-4,
    t_max: float | None = None,
    v_tol: float = 1e-10,
) -> float:
    """RK4 integration of V' = -c1 V^a1 - c2 V^a2 + c3 until V reaches the domain.

    Returns 0 if V0 is already at or below the domain level.  The
    crossing is localized by bisection within the crossing step to
    ``v_tol`` in V.  Raises SettleTimeoutError if the horizon ``t_max``
    (default 20x the non-positive-regime bound) is exhausted.
    """
    if dt <= 0:
        raise ParameterError(f"dt must be positive, got {dt}")
    level = domain_bound(p)
    if V0 <= level:
        return 0.0
    if t_max is None:
        t_max = 20.0 * p.mu * math.pi / p.critical_c3
    t = _settle(float(V0), level, float(dt), float(t_max), p.c1, p.c2, p.c3, p.a1, p.a2, v_tol)
    if t < 0.0:
        raise SettleTimeoutError(
            f"V did not reach level {level:.6g} within horizon {t_max:.6g}"
        )
    return t


def robust_margin(grad_bound: float, phi_inf: float) -> float:
    """Disturbance-induced c3: gradient bound times sup-norm disturbance bound."""
    if grad_bound < 0 or phi_inf < 0:
        raise ParameterError("robust_margin arguments must be nonnegative")
    return grad_bound * phi_inf


def convergence_estimate(
    p: FxtsParams, variant: BoundVariant = BoundVariant.LEMMA_K2
) -> ConvergenceEstimate:
    """Domain level and time bound together; invalid supercritical bounds map to +inf."""
    tb = settling_time_bound(p, variant)
    value = tb.value if tb.valid else math.inf
    return ConvergenceEstimate(domain_bound(p), value, tb.regime, tb.valid)


@dataclass(frozen=True)
class SupercriticalCase:
    """One row of the supercritical diagnosis report."""

    params: FxtsParams
    V0: float
    closed_form: float
    oracle_time: float
    closed_form_positive: bool = field(init=False)
    sound: bool = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "closed_form_positive", self.closed_form > 0.0)
        object.__setattr__(
            self,
            "sound",
            self.closed_form > 0.0 and self.closed_form >= self.oracle_time,
        )


def supercritical_report(
    cases: list[tuple[FxtsParams, float]], dt: float = 1e-4
) -> list[SupercriticalCase]:
    """Compare the printed supercritical closed form against the RK4 oracle.

    For each (params, V0) pair the closed form is evaluated as printed
    and the oracle integrates to the domain level; ``sound`` is False
    whenever the closed form is non-positive or undershoots the oracle.
    An oracle that stalls near the domain boundary (near-repeated roots
    make the approach arbitrarily slow) is recorded as +inf.
    """
    rows = []
    for p, v0 in cases:
        if classify_regime(p) is not Regime.SUPERCRITICAL:
            raise PreconditionError("report is only defined for supercritical cases")
        closed = settling_time_bound(p).value
        try:
            oracle = numeric_settling_time(p, v0, dt=dt)
        except SettleTimeoutError:
            oracle = math.inf
        rows.append(SupercriticalCase(p, v0, closed, oracle))
    return rows
