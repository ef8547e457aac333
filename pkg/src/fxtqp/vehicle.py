"""Kinematic bicycle integration with bounded disturbances and noisy sensing.

State is q = [x, y, theta, v]; inputs are heading rate omega and
longitudinal acceleration a.  Disturbances enter all four channels
additively and are sampled once per control step (zero-order hold).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

__all__ = [
    "VehicleState",
    "ControlInput",
    "InputLimits",
    "DisturbanceModel",
    "SensingModel",
    "drift",
    "step",
    "step_rk4",
    "sample_disturbance",
    "sense",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class VehicleState:
    x: float
    y: float
    theta: float
    v: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta, self.v])

    @staticmethod
    def from_array(q) -> "VehicleState":
        return VehicleState(float(q[0]), float(q[1]), float(q[2]), float(q[3]))


@dataclass(frozen=True)
class ControlInput:
    omega: float
    a: float


@dataclass(frozen=True)
class InputLimits:
    omega_min: float
    omega_max: float
    a_min: float
    a_max: float

    def __post_init__(self) -> None:
        if not (self.omega_min < self.omega_max and self.a_min < self.a_max):
            raise ParameterError("input limits must satisfy min < max")

    def clip(self, u: ControlInput) -> ControlInput:
        return ControlInput(
            min(max(u.omega, self.omega_min), self.omega_max),
            min(max(u.a, self.a_min), self.a_max),
        )


@dataclass(frozen=True)
class DisturbanceModel:
    """Per-component saturated Gaussian: sigma = phi_inf/3, clipped at +/- phi_inf."""

    phi_inf: float
    seed: int = 0
    distribution: str = "SaturatedGaussian"

    def __post_init__(self) -> None:
        if self.phi_inf < 0:
            raise ParameterError("phi_inf must be nonnegative")
        if self.distribution != "SaturatedGaussian":
            raise ParameterError(f"unknown distribution {self.distribution!r}")

    def rng(self, *extra_keys: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.seed, *extra_keys]))


@dataclass(frozen=True)
class SensingModel:
    """State estimates are the truth plus a random vector of norm <= eps."""

    eps: float
    seed: int = 0

    def __post_init__(self) -> None:
        if self.eps < 0:
            raise ParameterError("eps must be nonnegative")

    def rng(self, *extra_keys: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.seed, *extra_keys]))


def drift(q: VehicleState) -> np.ndarray:
    """Uncontrolled state derivative (v cos theta, v sin theta, 0, 0)."""
    return np.array([q.v * math.cos(q.theta), q.v * math.sin(q.theta), 0.0, 0.0])


def step(q: VehicleState, u: ControlInput, phi: np.ndarray, dt: float) -> VehicleState:
    """One explicit-Euler step with control and disturbance held constant."""
    if dt <= 0:
        raise ParameterError("dt must be positive")
    c = math.cos(q.theta)
    s = math.sin(q.theta)
    x = q.x + dt * (q.v * c + phi[0])
    y = q.y + dt * (q.v * s + phi[1])
    theta = q.theta + dt * (u.omega + phi[2])
    v = q.v + dt * (u.a + phi[3])
    if v < 0.0:
        log.warning("speed clamped at 0 (was %.6g)", v)
        v = 0.0
    return VehicleState(x, y, theta, v)


def step_rk4(q: VehicleState, u: ControlInput, phi: np.ndarray, dt: float) -> VehicleState:
    """RK4 step with the same zero-order-held control and disturbance."""
    if dt <= 0:
        raise ParameterError("dt must be positive")

    def f(arr):
        return np.array(
            [
                arr[3] * math.cos(arr[2]) + phi[0],
                arr[3] * math.sin(arr[2]) + phi[1],
                u.omega + phi[2],
                u.a + phi[3],
            ]
        )

    q0 = q.as_array()
    k1 = f(q0)
    k2 = f(q0 + 0.5 * dt * k1)
    k3 = f(q0 + 0.5 * dt * k2)
    k4 = f(q0 + dt * k3)
    out = q0 + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    if out[3] < 0.0:
        log.warning("speed clamped at 0 (was %.6g)", out[3])
        out[3] = 0.0
    return VehicleState.from_array(out)


def sample_disturbance(m: DisturbanceModel, rng: np.random.Generator) -> np.ndarray:
    """One i.i.d. draw per channel from N(0, (phi_inf/3)^2), clipped at +/- phi_inf."""
    if m.phi_inf == 0.0:
        # keep the stream position advancing so that toggling the bound
        # does not reshuffle downstream draws
        rng.standard_normal(4)
        return np.zeros(4)
    raw = rng.standard_normal(4) * (m.phi_inf / 3.0)
    return np.clip(raw, -m.phi_inf, m.phi_inf)


def sense(q_true: VehicleState, m: SensingModel, rng: np.random.Generator) -> VehicleState:
    """Noisy state estimate: truth plus a vector of Euclidean norm <= eps."""
    direction = rng.standard_normal(4)
    radius = rng.uniform(0.0, 1.0)
    if m.eps == 0.0:
        return q_true
    norm = float(np.linalg.norm(direction))
    if norm < 1e-12:
        return q_true
    offset = direction / norm * (radius * m.eps)
    return VehicleState(
        q_true.x + offset[0],
        q_true.y + offset[1],
        q_true.theta + offset[2],
        q_true.v + offset[3],
    )
