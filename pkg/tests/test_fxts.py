"""Tests for the fixed-time convergence bounds and their numeric oracle."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from fxtqp import (
    BoundVariant,
    DegenerateBoundError,
    FxtsParams,
    ParameterError,
    PreconditionError,
    Regime,
    classify_regime,
    convergence_estimate,
    domain_bound,
    lemma3_integral_bound,
    numeric_settling_time,
    robust_margin,
    settling_time_bound,
    supercritical_report,
)


def test_params_validation():
    with pytest.raises(ParameterError):
        FxtsParams(0.0, 1.0, 0.0, 2.0)
    with pytest.raises(ParameterError):
        FxtsParams(1.0, -1.0, 0.0, 2.0)
    with pytest.raises(ParameterError):
        FxtsParams(1.0, 1.0, 0.0, 1.0)
    with pytest.raises(ParameterError):
        FxtsParams(1.0, 1.0, 0.0, 2.0, k=1.0)
    with pytest.raises(ParameterError):
        FxtsParams(1.0, 1.0, math.inf, 2.0)


def test_exponents():
    p = FxtsParams(1.0, 1.0, 0.0, 2.0)
    assert p.a1 == 1.5
    assert p.a2 == 0.5
    p = FxtsParams(1.0, 1.0, 0.0, 5.0)
    assert math.isclose(p.a1, 1.2)
    assert math.isclose(p.a2, 0.8)


def test_classify_regime_examples():
    assert classify_regime(FxtsParams(1, 1, 0.0, 2)) is Regime.NON_POSITIVE
    assert classify_regime(FxtsParams(1, 1, 1.0, 2)) is Regime.SUBCRITICAL
    assert classify_regime(FxtsParams(1, 1, 2.5, 2)) is Regime.SUPERCRITICAL
    # boundary belongs to the upper case
    assert classify_regime(FxtsParams(1, 1, 2.0, 2)) is Regime.SUPERCRITICAL


def test_classify_regime_partitions():
    rng = np.random.default_rng(11)
    for _ in range(200):
        c1, c2 = rng.uniform(0.1, 10.0, size=2)
        c3 = rng.uniform(-5.0, 5.0) * math.sqrt(c1 * c2)
        p = FxtsParams(c1, c2, c3, rng.uniform(1.5, 10.0))
        r = classify_regime(p)
        if c3 <= 0:
            assert r is Regime.NON_POSITIVE
        elif c3 < 2.0 * math.sqrt(c1 * c2):
            assert r is Regime.SUBCRITICAL
        else:
            assert r is Regime.SUPERCRITICAL


def test_domain_bound_examples():
    assert domain_bound(FxtsParams(1, 1, 0.0, 2)) == 0.0
    assert math.isclose(domain_bound(FxtsParams(1, 1, 1.0, 2)), 0.5)
    # larger quadratic root is (2.5 + 1.5)/2 = 2; level = 1.05 * 2^2
    assert math.isclose(domain_bound(FxtsParams(1, 1, 2.5, 2, k=1.05)), 4.2)


def test_domain_bound_monotone_in_c3_within_regime():
    # nondecreasing in c3 inside each regime; across the regime boundary
    # the level jumps from 1 to k*sqrt(c2/c1)^mu, which is a drop when
    # c2 < c1, so monotonicity is only claimed per regime
    rng = np.random.default_rng(5)
    for _ in range(100):
        c1, c2 = rng.uniform(0.1, 10.0, size=2)
        mu = rng.uniform(1.5, 10.0)
        grid = np.sort(rng.uniform(-1.0, 4.0, size=8) * math.sqrt(c1 * c2))
        params = [FxtsParams(c1, c2, c3, mu) for c3 in grid]
        for pa, pb in zip(params, params[1:]):
            if classify_regime(pa) is classify_regime(pb):
                assert domain_bound(pb) >= domain_bound(pa) - 1e-12


def test_domain_bound_monotone_across_boundary_when_c2_dominates():
    rng = np.random.default_rng(6)
    for _ in range(100):
        c1 = rng.uniform(0.1, 5.0)
        c2 = c1 * rng.uniform(1.0, 5.0)
        mu = rng.uniform(1.5, 10.0)
        grid = np.sort(rng.uniform(0.0, 4.0, size=8) * math.sqrt(c1 * c2))
        vals = [domain_bound(FxtsParams(c1, c2, c3, mu)) for c3 in grid]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def test_domain_bound_boundary_continuity():
    c1, c2, mu, k = 2.0, 3.0, 4.0, 1.05
    crit = 2.0 * math.sqrt(c1 * c2)
    below = domain_bound(FxtsParams(c1, c2, crit * (1 - 1e-12), mu, k))
    assert math.isclose(below, 1.0, rel_tol=1e-6)
    at = domain_bound(FxtsParams(c1, c2, crit, mu, k))
    assert math.isclose(at, k * math.sqrt(c2 / c1) ** mu, rel_tol=1e-9)


def test_settling_time_examples():
    tb = settling_time_bound(FxtsParams(1, 1, 0.0, 2))
    assert tb.valid and math.isclose(tb.value, math.pi)
    tb = settling_time_bound(FxtsParams(1, 1, 1.0, 2), BoundVariant.THEOREM_K2)
    # k1 = sqrt(0.75), k2 = -1/sqrt(3)
    k1 = math.sqrt(0.75)
    expect = (2.0 / k1) * (math.pi / 2.0 + math.atan(1.0 / math.sqrt(3.0)))
    assert math.isclose(tb.value, expect)
    assert math.isclose(tb.value, 4.8366, rel_tol=1e-4)
    tb = settling_time_bound(FxtsParams(1, 1, 1.0, 2), BoundVariant.LEMMA_K2)
    expect = (2.0 / k1) * (math.pi / 2.0 - math.atan(1.0 / math.sqrt(3.0)))
    assert math.isclose(tb.value, expect)
    assert math.isclose(tb.value, 2.4184, rel_tol=1e-4)


def test_settling_time_supercritical_flag():
    # roots 0.5 and 2 are distinct, so the printed log form is negative
    tb = settling_time_bound(FxtsParams(1, 1, 2.5, 2, k=1.05))
    assert tb.regime is Regime.SUPERCRITICAL
    assert tb.value <= 0.0
    assert not tb.valid


def test_settling_time_repeated_roots():
    with pytest.raises(DegenerateBoundError):
        settling_time_bound(FxtsParams(1, 1, 2.0, 2))


def test_convergence_estimate_maps_invalid_to_inf():
    est = convergence_estimate(FxtsParams(1, 1, 2.5, 2, k=1.05))
    assert est.regime is Regime.SUPERCRITICAL
    assert not est.time_bound_valid
    assert math.isinf(est.time_bound)
    est = convergence_estimate(FxtsParams(1, 1, 0.0, 2))
    assert est.time_bound_valid
    assert est.domain_level == 0.0


def test_numeric_settling_inside_domain():
    assert numeric_settling_time(FxtsParams(1, 1, 1.0, 2), 0.5) == 0.0


def test_numeric_settling_respects_closed_forms():
    assert numeric_settling_time(FxtsParams(1, 1, 0.0, 2), 100.0) <= math.pi
    t = numeric_settling_time(FxtsParams(1, 1, 1.0, 2), 10.0)
    assert t <= 4.8366


def test_numeric_settling_validation():
    with pytest.raises(ParameterError):
        numeric_settling_time(FxtsParams(1, 1, 0.0, 2), 1.0, dt=0.0)


def test_soundness_property_seeded():
    # numeric time never exceeds the closed-form bound in the regimes
    # where the closed form is claimed valid
    rng = np.random.default_rng(17)
    for _ in range(50):
        c1, c2 = rng.uniform(0.1, 10.0, size=2)
        mu = rng.uniform(1.5, 10.0)
        crit = 2.0 * math.sqrt(c1 * c2)
        c3 = rng.uniform(-1.0, 1.0) * crit * 0.99
        p = FxtsParams(c1, c2, c3, mu)
        level = domain_bound(p)
        v0 = rng.uniform(max(level * 1.01, 1e-3), 1e3)
        if v0 <= level:
            continue
        bound = settling_time_bound(p, BoundVariant.THEOREM_K2).value
        t = numeric_settling_time(p, v0, dt=1e-4)
        assert t <= bound + 1e-6


def test_lemma3_integral_examples():
    p = FxtsParams(1, 1, 1.0, 2)
    b = lemma3_integral_bound(p, 1.0)
    assert b.valid and b.value >= 0.0
    with pytest.raises(PreconditionError):
        lemma3_integral_bound(p, 0.5)
    with pytest.raises(PreconditionError):
        lemma3_integral_bound(FxtsParams(1, 1, -1.0, 2), 10.0)
    sup = FxtsParams(1, 1, 2.5, 2, k=1.05)
    with pytest.raises(PreconditionError):
        lemma3_integral_bound(sup, 1.0)  # below k*b^mu = 4.2
    r = lemma3_integral_bound(sup, 10.0)
    assert not r.valid  # printed form non-positive for distinct roots


def _settle_integrand(p: FxtsParams):
    def f(v):
        return 1.0 / (p.c1 * v**p.a1 + p.c2 * v**p.a2 - p.c3)

    return f


def test_lemma3_integral_vs_quadrature():
    # the closed form upper-bounds the true integral from Vbar = 1 up to V0
    rng = np.random.default_rng(23)
    for _ in range(40):
        c1, c2 = rng.uniform(0.1, 5.0, size=2)
        crit = 2.0 * math.sqrt(c1 * c2)
        c3 = rng.uniform(0.05, 0.95) * crit
        p = FxtsParams(c1, c2, c3, rng.uniform(1.5, 8.0))
        v0 = rng.uniform(1.0, 100.0)
        exact, err = quad(_settle_integrand(p), 1.0, v0, limit=200)
        assert err < 1e-7
        bound = lemma3_integral_bound(p, v0)
        assert bound.valid
        assert exact <= bound.value + 1e-7


def test_numeric_settling_matches_quadrature():
    # crossing time of the ODE equals the integral of 1/(-dV/dt)
    p = FxtsParams(2.0, 0.7, 0.4, 3.0)
    level = domain_bound(p)
    v0 = 50.0
    exact, err = quad(_settle_integrand(p), level * 1.0000001, v0, limit=400)
    t = numeric_settling_time(p, v0, dt=1e-5)
    # the integrand diverges at the domain level, so compare loosely from
    # a level slightly above it
    assert t >= exact - 1e-3
    assert abs(t - exact) / exact < 0.05


def test_reduction_at_zero_c3():
    # with c3 = 0 the bound reduces to the undisturbed two-term form
    for mu, c1, c2 in ((2.0, 1.0, 1.0), (5.0, 0.3, 2.0)):
        tb = settling_time_bound(FxtsParams(c1, c2, 0.0, mu))
        assert math.isclose(tb.value, mu * math.pi / (2.0 * math.sqrt(c1 * c2)))


def test_robust_margin():
    assert robust_margin(2.0, 3.0) == 6.0
    assert robust_margin(0.0, 5.0) == 0.0
    with pytest.raises(ParameterError):
        robust_margin(-1.0, 1.0)


def test_supercritical_report_flags():
    cases = [
        (FxtsParams(1, 1, 2.5, 2, k=1.05), 10.0),
        (FxtsParams(0.5, 2.0, 4.0, 3, k=1.1), 50.0),
    ]
    rows = supercritical_report(cases, dt=1e-3)
    for row in rows:
        assert row.closed_form_positive == (row.closed_form > 0.0)
        assert row.sound == (
            row.closed_form > 0.0 and row.closed_form >= row.oracle_time
        )
    with pytest.raises(PreconditionError):
        supercritical_report([(FxtsParams(1, 1, 0.0, 2), 10.0)])
