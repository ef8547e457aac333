"""Fixed-time safe-control synthesis and a two-lane overtaking simulator.

The package has three layers: convergence bounds for a fixed-time
Lyapunov differential inequality (:mod:`fxtqp.fxts`), a small dense QP
solver plus the CLF/CBF constraint assembly that feeds it
(:mod:`fxtqp.qp`, :mod:`fxtqp.clf_cbf`), and a closed-loop overtaking
case study with bounded non-vanishing disturbances
(:mod:`fxtqp.vehicle`, :mod:`fxtqp.scenario`) exposed through a CLI
(:mod:`fxtqp.cli`).
"""

__version__ = "0.1.0"

from .clf_cbf import (
    ClfGains,
    GoalState,
    QpWeights,
    RoadGeometry,
    RobustOptions,
    assemble_qp,
    cbf_lane,
    cbf_lead,
    check_gains,
    clf_eval,
    clf_gradient_bound,
)
from .config import config_from_dict, config_to_dict, parse_config, write_config
from .errors import (
    BudgetError,
    ConfigError,
    DegenerateBoundError,
    FxtqpError,
    GeometryError,
    ParameterError,
    PreconditionError,
    SettleTimeoutError,
)
from .fxts import (
    BoundVariant,
    ConvergenceEstimate,
    FxtsParams,
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
from .qp import QpProblem, QpSolution, QpStatus, enumerate_oracle, kkt_residuals, solve_qp
from .scenario import (
    Phase,
    ScenarioConfig,
    SlackWeights,
    SweepPoint,
    TrajectoryLog,
    decide_overtake,
    estimate_c3,
    estimate_total_time,
    overtake_horizon,
    phase_goal,
    phase_time_budget,
    run_episode,
    total_budget,
)
from .vehicle import (
    ControlInput,
    DisturbanceModel,
    InputLimits,
    SensingModel,
    VehicleState,
    drift,
    sample_disturbance,
    sense,
    step,
    step_rk4,
)

__all__ = [
    "__version__",
    # fxts
    "FxtsParams",
    "Regime",
    "BoundVariant",
    "ConvergenceEstimate",
    "classify_regime",
    "domain_bound",
    "settling_time_bound",
    "lemma3_integral_bound",
    "numeric_settling_time",
    "robust_margin",
    "convergence_estimate",
    "supercritical_report",
    # qp
    "QpProblem",
    "QpSolution",
    "QpStatus",
    "solve_qp",
    "kkt_residuals",
    "enumerate_oracle",
    # clf/cbf
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
    # vehicle
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
    # scenario
    "Phase",
    "ScenarioConfig",
    "SlackWeights",
    "SweepPoint",
    "TrajectoryLog",
    "phase_goal",
    "phase_time_budget",
    "total_budget",
    "overtake_horizon",
    "decide_overtake",
    "estimate_total_time",
    "run_episode",
    "estimate_c3",
    # config
    "parse_config",
    "config_from_dict",
    "config_to_dict",
    "write_config",
    # errors
    "FxtqpError",
    "ParameterError",
    "PreconditionError",
    "GeometryError",
    "DegenerateBoundError",
    "SettleTimeoutError",
    "BudgetError",
    "ConfigError",
]
