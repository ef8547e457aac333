"""Tests for the kinematic integration, disturbances, and sensing."""

import math

import numpy as np
import pytest

from fxtqp import (
    ControlInput,
    DisturbanceModel,
    InputLimits,
    ParameterError,
    SensingModel,
    VehicleState,
    drift,
    sample_disturbance,
    sense,
    step,
    step_rk4,
)


def test_drift_examples():
    assert np.allclose(drift(VehicleState(0, 0, 0, 10)), [10, 0, 0, 0])
    assert np.allclose(drift(VehicleState(0, 0, math.pi / 2, 5)), [0, 5, 0, 0], atol=1e-12)
    assert np.allclose(drift(VehicleState(1, 2, math.pi, 25)), [-25, 0, 0, 0], atol=1e-12)


def test_step_examples():
    q = step(VehicleState(0, 0, 0, 10), ControlInput(0, 1.0), np.zeros(4), 0.001)
    assert math.isclose(q.x, 0.01)
    assert q.y == 0.0 and q.theta == 0.0
    assert math.isclose(q.v, 10.001)
    # pure drift
    q = step(VehicleState(0, 0, 0, 10), ControlInput(0, 0), np.zeros(4), 0.5)
    assert math.isclose(q.x, 5.0) and math.isclose(q.v, 10.0)
    # disturbance on the speed channel only
    q = step(VehicleState(0, 0, 0, 10), ControlInput(0, 0), np.array([0, 0, 0, -2.0]), 0.001)
    assert math.isclose(q.v, 10.0 - 0.002)


def test_step_validation_and_speed_clamp():
    with pytest.raises(ParameterError):
        step(VehicleState(0, 0, 0, 1), ControlInput(0, 0), np.zeros(4), 0.0)
    q = step(VehicleState(0, 0, 0, 0.001), ControlInput(0, -10.0), np.zeros(4), 0.1)
    assert q.v == 0.0
    q = step_rk4(VehicleState(0, 0, 0, 0.001), ControlInput(0, -10.0), np.zeros(4), 0.1)
    assert q.v == 0.0


def test_euler_consistency_order():
    # halving dt roughly halves the error against a fine reference
    u = ControlInput(0.1, 0.5)
    phi = np.zeros(4)

    def integrate(dt):
        q = VehicleState(0, 0, 0, 10)
        for _ in range(int(round(1.0 / dt))):
            q = step(q, u, phi, dt)
        return q.as_array()

    ref = VehicleState(0, 0, 0, 10)
    for _ in range(10000):
        ref = step_rk4(ref, u, phi, 1e-4)
    ref = ref.as_array()
    e1 = np.linalg.norm(integrate(0.01) - ref)
    e2 = np.linalg.norm(integrate(0.005) - ref)
    assert 1.5 <= e1 / e2 <= 2.5


def test_rk4_agrees_with_euler_limit():
    u = ControlInput(0.05, 1.0)
    phi = np.array([0.1, -0.1, 0.02, 0.3])
    a = step_rk4(VehicleState(1, 2, 0.3, 15), u, phi, 1e-4).as_array()
    b = step(VehicleState(1, 2, 0.3, 15), u, phi, 1e-4).as_array()
    assert np.linalg.norm(a - b) < 1e-6


def test_input_limits():
    with pytest.raises(ParameterError):
        InputLimits(1.0, -1.0, -1.0, 1.0)
    lim = InputLimits(-0.2, 0.2, -2.0, 2.0)
    u = lim.clip(ControlInput(5.0, -9.0))
    assert u.omega == 0.2 and u.a == -2.0


def test_disturbance_model_validation():
    with pytest.raises(ParameterError):
        DisturbanceModel(phi_inf=-1.0)
    with pytest.raises(ParameterError):
        DisturbanceModel(phi_inf=1.0, distribution="Uniform")


def test_disturbance_saturation_and_zero():
    m = DisturbanceModel(phi_inf=3.99, seed=1)
    rng = m.rng(0)
    for _ in range(2000):
        phi = sample_disturbance(m, rng)
        assert np.all(np.abs(phi) <= 3.99)
    z = DisturbanceModel(phi_inf=0.0, seed=1)
    assert np.all(sample_disturbance(z, z.rng(0)) == 0.0)


def test_disturbance_mean_and_determinism():
    m = DisturbanceModel(phi_inf=2.0, seed=5)
    rng = m.rng(0)
    draws = np.array([sample_disturbance(m, rng) for _ in range(100000)])
    assert np.all(np.abs(draws.mean(axis=0)) <= 0.02 * m.phi_inf)
    rng_a = m.rng(0)
    rng_b = m.rng(0)
    for _ in range(10):
        assert np.array_equal(sample_disturbance(m, rng_a), sample_disturbance(m, rng_b))


def test_sense_bound_and_determinism():
    q = VehicleState(10.0, 1.5, 0.05, 17.0)
    m = SensingModel(eps=3.99, seed=2)
    rng = m.rng(0)
    for _ in range(500):
        est = sense(q, m, rng)
        err = est.as_array() - q.as_array()
        assert np.linalg.norm(err) <= 3.99 + 1e-12
    exact = SensingModel(eps=0.0, seed=2)
    assert sense(q, exact, exact.rng(0)) == q
    a = sense(q, m, m.rng(7))
    b = sense(q, m, m.rng(7))
    assert a == b
