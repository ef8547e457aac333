"""JSON configuration for the overtake scenario.

The file is a single JSON object with optional sections {gains, road,
limits, weights, disturbance, sensing, scenario, solver}; any omitted
field takes the default two-lane scenario value.  ``parse_config`` and
``write_config`` round-trip every valid configuration.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

from .clf_cbf import ClfGains, RoadGeometry, RobustOptions
from .errors import ConfigError, ParameterError
from .fxts import BoundVariant
from .scenario import ScenarioConfig, SlackWeights
from .vehicle import DisturbanceModel, InputLimits, SensingModel

__all__ = ["parse_config", "config_from_dict", "config_to_dict", "write_config"]

_SECTIONS = {
    "gains": ClfGains,
    "road": RoadGeometry,
    "limits": InputLimits,
    "weights": SlackWeights,
    "disturbance": DisturbanceModel,
    "sensing": SensingModel,
}

_SCENARIO_FIELDS = (
    "v_lead0",
    "t_p",
    "vg_overtake",
    "dt",
    "T_merge_out",
    "T_pass",
    "T_merge_back",
    "seed",
    "c3_star",
    "integrator",
    "disturb_all",
)

_SOLVER_FIELDS = ("robust", "quasi_static", "k_margin", "bound_variant")


def _build_section(name: str, cls, data: dict):
    allowed = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown field(s) in '{name}': {sorted(unknown)}")
    try:
        return cls(**data)
    except (ParameterError, TypeError) as exc:
        raise ConfigError(f"invalid '{name}' section: {exc}") from exc


def config_from_dict(raw: dict) -> ScenarioConfig:
    """Build a validated ScenarioConfig from a (possibly sparse) dict."""
    if not isinstance(raw, dict):
        raise ConfigError("top-level config must be a JSON object")
    known = set(_SECTIONS) | {"scenario", "solver"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown top-level section(s): {sorted(unknown)}")

    kwargs: dict = {}
    defaults = ScenarioConfig()
    for name, cls in _SECTIONS.items():
        data = raw.get(name, {})
        if not isinstance(data, dict):
            raise ConfigError(f"section '{name}' must be an object")
        base = dataclasses.asdict(getattr(defaults, name))
        base.update(data)
        kwargs[name] = _build_section(name, cls, base)

    scen = raw.get("scenario", {})
    if not isinstance(scen, dict):
        raise ConfigError("section 'scenario' must be an object")
    unknown = set(scen) - set(_SCENARIO_FIELDS)
    if unknown:
        raise ConfigError(f"unknown field(s) in 'scenario': {sorted(unknown)}")
    for name in _SCENARIO_FIELDS:
        if name in scen:
            kwargs[name] = scen[name]

    solver = raw.get("solver", {})
    if not isinstance(solver, dict):
        raise ConfigError("section 'solver' must be an object")
    unknown = set(solver) - set(_SOLVER_FIELDS)
    if unknown:
        raise ConfigError(f"unknown field(s) in 'solver': {sorted(unknown)}")
    if "k_margin" in solver:
        kwargs["k_margin"] = solver["k_margin"]
    if "bound_variant" in solver:
        try:
            kwargs["bound_variant"] = BoundVariant(solver["bound_variant"])
        except ValueError as exc:
            raise ConfigError(f"invalid 'solver.bound_variant': {exc}") from exc

    # the robust tightening always uses the simulated disturbance bound
    kwargs["robust"] = RobustOptions(
        enabled=bool(solver.get("robust", True)),
        phi_inf=kwargs["disturbance"].phi_inf,
        quasi_static=bool(solver.get("quasi_static", False)),
    )

    try:
        return ScenarioConfig(**kwargs)
    except (ConfigError, ParameterError) as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(path: str | Path) -> ScenarioConfig:
    """Read and validate a JSON configuration file."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        raw = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"malformed JSON in {p} at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return config_from_dict(raw)


def config_to_dict(cfg: ScenarioConfig) -> dict:
    """Full dict form of a configuration (inverse of ``config_from_dict``)."""
    out = {name: dataclasses.asdict(getattr(cfg, name)) for name in _SECTIONS}
    out["scenario"] = {name: getattr(cfg, name) for name in _SCENARIO_FIELDS}
    out["solver"] = {
        "robust": cfg.robust.enabled,
        "quasi_static": cfg.robust.quasi_static,
        "k_margin": cfg.k_margin,
        "bound_variant": cfg.bound_variant.value,
    }
    return out


def write_config(cfg: ScenarioConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(cfg), indent=2, sort_keys=True) + "\n")
