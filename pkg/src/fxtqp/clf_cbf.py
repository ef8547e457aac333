"""CLF and CBF evaluation and assembly of the safe fixed-time tracking QP.

The Lyapunov function is a quadratic form in the tracking error with a
constant offset, so its zero-sublevel set is the goal set.  Both barrier
functions are sign-normalized to the convention "safe iff h >= 0": the
road barrier is positive between the steering-aware lane edges and the
lead-vehicle barrier is positive outside the headway ellipse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import GeometryError, ParameterError
from .qp import QpProblem
from .vehicle import InputLimits, VehicleState, drift

__all__ = [
    "ClfGains",
    "GoalState",
    "RoadGeometry",
    "QpWeights",
    "RobustOptions",
    "check_gains",
    "clf_eval",
    "cbf_lane",
    "cbf_lead",
    "assemble_qp",
    "clf_gradient_bound",
]


@dataclass(frozen=True)
class ClfGains:
    """Quadratic-form gains; K is the overall scale."""

    K: float
    kx: float
    ky: float
    ktheta: float
    kv: float
    kxv: float
    kytheta: float

    def __post_init__(self) -> None:
        if self.K <= 0:
            raise ParameterError("K must be positive")
        for name in ("kx", "ky", "ktheta", "kv", "kxv", "kytheta"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be nonnegative")


def check_gains(gains: ClfGains) -> bool:
    """Positive-definiteness of the error quadratic form (strict cross-term bounds)."""
    ok_xv = 0.0 < gains.kxv < 2.0 * math.sqrt(gains.kx * gains.kv)
    ok_yt = 0.0 < gains.kytheta < 2.0 * math.sqrt(gains.ky * gains.ktheta)
    return ok_xv and ok_yt


@dataclass(frozen=True)
class GoalState:
    xg: float
    yg: float
    thetag: float
    vg: float


@dataclass(frozen=True)
class RoadGeometry:
    lane_width: float  # w_l
    car_width: float  # w_c
    car_length: float  # l_c
    omega_max: float  # steering bound used in the lane-edge margins
    tau: float  # time headway [s]

    def __post_init__(self) -> None:
        for name in ("lane_width", "car_width", "car_length", "omega_max", "tau"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be positive")
        if self.car_width >= self.lane_width:
            raise ParameterError("car must be narrower than a lane")

    @property
    def s_dy(self) -> float:
        return self.lane_width - self.car_width / 2.0


@dataclass(frozen=True)
class QpWeights:
    """Slack weights plus the exponent/time parameters defining the CLF row."""

    p1: float
    p2: float
    p3: float
    q1: float
    mu: float
    T_phase: float

    def __post_init__(self) -> None:
        if min(self.p1, self.p2, self.p3, self.q1) < 0:
            raise ParameterError("slack weights must be nonnegative")
        if self.mu <= 1:
            raise ParameterError("mu must exceed 1")
        if self.T_phase <= 0:
            raise ParameterError("T_phase must be positive")

    @property
    def gamma1(self) -> float:
        return 1.0 + 1.0 / self.mu

    @property
    def gamma2(self) -> float:
        return 1.0 - 1.0 / self.mu

    @property
    def alpha(self) -> float:
        return math.pi * self.mu / (2.0 * self.T_phase)


@dataclass(frozen=True)
class RobustOptions:
    enabled: bool = False
    phi_inf: float = 0.0
    quasi_static: bool = False

    def __post_init__(self) -> None:
        if self.phi_inf < 0:
            raise ParameterError("phi_inf must be nonnegative")


def clf_eval(
    q: VehicleState, g: GoalState, gains: ClfGains
) -> tuple[float, np.ndarray]:
    """Value and exact gradient (w.r.t. the vehicle state) of the tracking CLF."""
    ex = q.x - g.xg
    ey = q.y - g.yg
    et = q.theta - g.thetag
    ev = q.v - g.vg
    K = gains.K
    value = K * (
        gains.kx * ex * ex
        + gains.kv * ev * ev
        + gains.kxv * ex * ev
        + gains.ky * ey * ey
        + gains.ktheta * et * et
        + gains.kytheta * ey * et
        - 1.0
    )
    grad = np.array(
        [
            K * (2.0 * gains.kx * ex + gains.kxv * ev),
            K * (2.0 * gains.ky * ey + gains.kytheta * et),
            K * (2.0 * gains.ktheta * et + gains.kytheta * ey),
            K * (2.0 * gains.kv * ev + gains.kxv * ex),
        ]
    )
    return value, grad


def cbf_lane(q: VehicleState, road: RoadGeometry) -> tuple[float, np.ndarray]:
    """Road barrier: positive while the car (with steering margin) is in the band.

    h = (y - e1)(e2 - y) with edges e1, e2 pulled inward by the
    turning-radius clearance (v/omega_max)*(1 - cos theta), the lateral
    distance the car still covers while flattening its heading at the
    maximum steering rate.  A heading-independent band has relative
    degree two in the steering input and cannot be rendered invariant
    near its edges under the rate limit; the clearance restores direct
    steering authority in the barrier row.
    """
    margin = q.v / road.omega_max * (1.0 - math.cos(q.theta))
    e1 = road.car_width / 2.0 + margin
    e2 = (2.0 * road.lane_width - road.car_width / 2.0) - margin
    value = (q.y - e1) * (e2 - q.y)
    d_margin_theta = q.v / road.omega_max * math.sin(q.theta)
    d_margin_v = (1.0 - math.cos(q.theta)) / road.omega_max
    span = e2 - e1
    grad = np.array(
        [
            0.0,
            e1 + e2 - 2.0 * q.y,
            -d_margin_theta * span,
            -d_margin_v * span,
        ]
    )
    return value, grad


def cbf_lead(
    qe: VehicleState, ql_est: VehicleState, road: RoadGeometry
) -> tuple[float, np.ndarray, np.ndarray]:
    """Headway barrier: positive while the ego is outside the lead's ellipse.

    h = (dx/s_dx)^2 + (dy/s_dy)^2 - 1 with s_dx = v_e*tau*cos(theta_e) + l_c.
    Returns (value, gradient w.r.t. ego state, gradient w.r.t. lead state).
    """
    s_dx = qe.v * road.tau * math.cos(qe.theta) + road.car_length
    if s_dx <= 0:
        raise GeometryError(f"headway semi-axis s_dx = {s_dx:.6g} must be positive")
    s_dy = road.s_dy
    dx = ql_est.x - qe.x
    dy = ql_est.y - qe.y
    rx = dx / s_dx
    ry = dy / s_dy
    value = rx * rx + ry * ry - 1.0
    ds_dtheta = -qe.v * road.tau * math.sin(qe.theta)
    ds_dv = road.tau * math.cos(qe.theta)
    common = -2.0 * rx * rx / s_dx
    grad_ego = np.array(
        [
            -2.0 * rx / s_dx,
            -2.0 * ry / s_dy,
            common * ds_dtheta,
            common * ds_dv,
        ]
    )
    grad_lead = np.array([2.0 * rx / s_dx, 2.0 * ry / s_dy, 0.0, 0.0])
    return value, grad_ego, grad_lead


def assemble_qp(
    qe: VehicleState,
    ql_est: VehicleState,
    ql_vel_est: np.ndarray,
    goal: GoalState,
    goal_rate: np.ndarray,
    gains: ClfGains,
    road: RoadGeometry,
    w: QpWeights,
    limits: InputLimits,
    robust: RobustOptions,
) -> QpProblem:
    """Build the 5-variable QP over z = (omega, a, delta1, delta2, delta3).

    Cost: 1/2 u'u + p1 d1^2 + p2 d2^2 + p3 d3^2 + q1 d1.
    Rows: the four input box constraints, one relaxed fixed-time CLF
    decrease row, and one relaxed row per barrier.  With robustness on,
    the CLF row is tightened by |dV/dq|*phi_inf and each barrier row by
    |dh/dq_e|*phi_inf; with ``quasi_static`` set the lead-motion drift
    term is omitted from the headway row.
    """
    phi = robust.phi_inf if robust.enabled else 0.0

    V, gV = clf_eval(qe, goal, gains)
    h1, g1 = cbf_lane(qe, road)
    h2, g2e, g2l = cbf_lead(qe, ql_est, road)
    f = drift(qe)

    vp = max(0.0, V)
    alpha = w.alpha
    decay = alpha * (vp**w.gamma1 + vp**w.gamma2)
    clf_drift = float(gV @ f) - float(gV @ goal_rate)
    clf_tighten = float(np.linalg.norm(gV)) * phi

    lane_drift = float(g1 @ f)
    rho1 = float(np.linalg.norm(g1)) * phi

    lead_drift = float(g2e @ f)
    if not robust.quasi_static:
        lead_drift += float(g2l @ np.asarray(ql_vel_est, dtype=float))
    rho2 = float(np.linalg.norm(g2e)) * phi

    P = np.diag([1.0, 1.0, 2.0 * w.p1, 2.0 * w.p2, 2.0 * w.p3])
    q = np.array([0.0, 0.0, w.q1, 0.0, 0.0])
    A = np.array(
        [
            [1.0, 0.0, 0.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, 0.0, 0.0, 0.0],
            [gV[2], gV[3], -1.0, 0.0, 0.0],
            [-g1[2], -g1[3], 0.0, -h1, 0.0],
            [-g2e[2], -g2e[3], 0.0, 0.0, -h2],
        ]
    )
    b = np.array(
        [
            limits.omega_max,
            -limits.omega_min,
            limits.a_max,
            -limits.a_min,
            -decay - clf_drift - clf_tighten,
            lane_drift - rho1,
            lead_drift - rho2,
        ]
    )
    return QpProblem(P, q, A, b)


def clf_gradient_bound(
    gains: ClfGains, box: tuple[tuple[float, float], ...]
) -> float:
    """Max Euclidean norm of the CLF gradient over an error-coordinate box.

    The gradient is affine in the error, so the maximum over the box is
    attained at one of its 16 corners.
    """
    if len(box) != 4:
        raise ParameterError("box must bound all four error coordinates")
    origin = GoalState(0.0, 0.0, 0.0, 0.0)
    best = 0.0
    for ex, ey, et, ev in product(*box):
        _, grad = clf_eval(VehicleState(ex, ey, et, ev), origin, gains)
        best = max(best, float(np.linalg.norm(grad)))
    return best
