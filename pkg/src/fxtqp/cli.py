"""Command-line front end.

Subcommands:
  run         one closed-loop overtake episode -> CSV + JSON + SVG
  montecarlo  trials across disturbance-bound levels -> table + summary
  sweep       QP-relaxation conditioning over a parameter grid -> table
  bounds      convergence-domain / settling-time calculator -> JSON

Exit codes: 0 success, 1 validation error, 2 safety violation,
3 QP infeasibility, 4 budget timeout.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

from .clf_cbf import RobustOptions
from .config import config_from_dict, config_to_dict, parse_config
from .errors import FxtqpError, SettleTimeoutError
from .fxts import (
    BoundVariant,
    FxtsParams,
    convergence_estimate,
    numeric_settling_time,
)
from .outputs import (
    RunManifest,
    episode_summary,
    plot_scatter,
    write_plots,
    write_summary_json,
    write_table_csv,
    write_trajectory_csv,
)
from .scenario import (
    OVERTAKE_PHASES,
    ScenarioConfig,
    SweepPoint,
    estimate_c3,
    phase_time_budget,
    run_episode,
    total_budget,
)

__all__ = ["main"]

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_SAFETY = 2
EXIT_INFEASIBLE = 3
EXIT_BUDGET = 4

_STATUS_EXIT = {
    "completed": EXIT_OK,
    "safety_violation": EXIT_SAFETY,
    "infeasible": EXIT_INFEASIBLE,
    "budget_timeout": EXIT_BUDGET,
    "timeout": EXIT_BUDGET,
}

# reference disturbance sup-norm for the Monte Carlo level ladder
MC_BASE_PHI_INF = 3.99


def _error_json(kind: str, message: str) -> None:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)


def _load_config(args) -> ScenarioConfig:
    cfg = parse_config(args.config) if args.config else config_from_dict({})
    if getattr(args, "seed", None) is not None:
        cfg = dataclasses.replace(
            cfg,
            seed=args.seed,
            disturbance=dataclasses.replace(cfg.disturbance, seed=args.seed),
            sensing=dataclasses.replace(cfg.sensing, seed=args.seed),
        )
    if getattr(args, "robust", None) is not None:
        cfg = dataclasses.replace(
            cfg,
            robust=RobustOptions(
                enabled=args.robust == "on",
                phi_inf=cfg.disturbance.phi_inf,
                quasi_static=cfg.robust.quasi_static,
            ),
        )
    if getattr(args, "quasi_static", False):
        cfg = dataclasses.replace(
            cfg, robust=dataclasses.replace(cfg.robust, quasi_static=True)
        )
    if getattr(args, "integrator", None) is not None:
        cfg = dataclasses.replace(cfg, integrator=args.integrator)
    return cfg


def _manifest(args, cfg: ScenarioConfig, experiment: str, out: Path) -> RunManifest:
    return RunManifest(
        experiment=experiment,
        config=config_to_dict(cfg),
        seed=cfg.seed,
        out_dir=str(out),
        config_path=args.config,
    )


def cmd_run(args) -> int:
    cfg = _load_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = _manifest(args, cfg, "run", out)
    h = manifest.hash()
    manifest.write(out / "manifest.json")

    log = run_episode(cfg)
    write_trajectory_csv(out / "trajectory.csv", log, h)
    write_summary_json(out / "summary.json", log, cfg, h)
    write_plots(out, log, h)
    print(json.dumps(episode_summary(log, cfg), sort_keys=True))
    return _STATUS_EXIT.get(log.status, EXIT_VALIDATION)


def cmd_montecarlo(args) -> int:
    cfg = _load_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = _manifest(args, cfg, "montecarlo", out)
    h = manifest.hash()
    manifest.write(out / "manifest.json")

    levels, trials = args.levels, args.trials
    budgets = {p: phase_time_budget(p, cfg) for p in OVERTAKE_PHASES}
    rows = []
    safe = converged = initiated = 0
    for li in range(1, levels + 1):
        scale = li / levels
        phi = MC_BASE_PHI_INF * scale
        for ti in range(trials):
            trial_seed = cfg.seed * 1_000_000 + li * 1_000 + ti
            trial_cfg = dataclasses.replace(
                cfg,
                seed=trial_seed,
                disturbance=dataclasses.replace(
                    cfg.disturbance, phi_inf=phi, seed=trial_seed
                ),
                sensing=dataclasses.replace(cfg.sensing, seed=trial_seed),
                robust=dataclasses.replace(cfg.robust, phi_inf=phi),
            )
            log = run_episode(trial_cfg)
            in_budget = log.completed and all(
                log.phase_times[p] <= budgets[p] for p in OVERTAKE_PHASES
            )
            is_safe = log.status != "safety_violation"
            t_total = (
                sum(log.phase_times[p] for p in OVERTAKE_PHASES)
                if log.completed
                else math.nan
            )
            safe += is_safe
            initiated += log.initiated
            converged += in_budget or not log.initiated
            rows.append(
                (
                    scale,
                    phi,
                    ti,
                    trial_seed,
                    log.status,
                    int(log.initiated),
                    t_total,
                    float(log.min_h_lane),
                    float(log.min_h_lead),
                    int(in_budget),
                )
            )

    columns = (
        "level",
        "phi_inf",
        "trial",
        "seed",
        "status",
        "initiated",
        "t_total",
        "min_h_lane",
        "min_h_lead",
        "converged_in_budget",
    )
    write_table_csv(out / "montecarlo.csv", columns, rows, h)
    done = [(r[1], r[6]) for r in rows if not math.isnan(r[6])]
    if done:
        plot_scatter(
            out / "convergence_times.svg",
            [d[0] for d in done],
            [d[1] for d in done],
            "disturbance bound",
            "total convergence time [s]",
            "convergence time vs disturbance bound",
            h,
        )
    total = levels * trials
    summary = {
        "trials": total,
        "safe": safe,
        "initiated": initiated,
        "converged_in_budget_or_deferred": converged,
        "budget_total": total_budget(cfg),
        "manifest_sha256": h,
    }
    (out / "montecarlo_summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n"
    )
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK if safe == total and converged == total else EXIT_SAFETY


def _default_sweep(cfg: ScenarioConfig) -> list[SweepPoint]:
    K = cfg.gains.K
    w = cfg.limits.omega_max
    a = cfg.limits.a_max
    T0 = total_budget(cfg)
    pts = [SweepPoint(K, s * T0, w, a) for s in (0.6, 0.8, 1.0, 1.2)]
    pts += [SweepPoint(K, T0, w, f * a) for f in (0.5, 2.0)]
    pts += [SweepPoint(K, T0, 0.8 * w, a)]
    return pts


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = _manifest(args, cfg, "sweep", out)
    h = manifest.hash()
    manifest.write(out / "manifest.json")

    c3_star, table = estimate_c3(cfg, _default_sweep(cfg))
    columns = ("K", "T", "omega_max", "a_max", "c3", "status")
    rows = [
        (r["K"], r["T"], r["omega_max"], r["a_max"], r["c3"], r["status"])
        for r in table
    ]
    write_table_csv(out / "sweep.csv", columns, rows, h)
    ok = [r for r in table if not math.isnan(r["c3"])]
    if ok:
        plot_scatter(
            out / "c3_vs_T.svg",
            [r["T"] for r in ok],
            [r["c3"] for r in ok],
            "total time window [s]",
            "2 * max(delta1)",
            "QP relaxation vs time window",
            h,
        )
    print(json.dumps({"c3_star": c3_star, "rows": len(table)}, sort_keys=True))
    return EXIT_OK if not math.isnan(c3_star) else EXIT_VALIDATION


def cmd_bounds(args) -> int:
    p = FxtsParams(args.c1, args.c2, args.c3, args.mu, args.k)
    variant = BoundVariant(args.variant)
    est = convergence_estimate(p, variant)
    doc = {
        "regime": est.regime.value,
        "domain_level": est.domain_level,
        "time_bound": est.time_bound if math.isfinite(est.time_bound) else "inf",
        "time_bound_valid": est.time_bound_valid,
        "variant": variant.value,
    }
    if args.v0 is not None:
        try:
            doc["oracle_time"] = numeric_settling_time(p, args.v0, dt=args.dt)
        except SettleTimeoutError as exc:
            doc["oracle_time"] = "timeout"
            doc["oracle_error"] = str(exc)
    print(json.dumps(doc, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fxtqp",
        description="fixed-time safe-control synthesis and overtake simulation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp, with_sim=True):
        sp.add_argument("--config", default=None, help="JSON configuration file")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--seed", type=int, default=None, help="master seed override")
        if with_sim:
            sp.add_argument("--robust", choices=("on", "off"), default=None)
            sp.add_argument("--quasi-static", dest="quasi_static", action="store_true")
            sp.add_argument("--integrator", choices=("euler", "rk4"), default=None)

    sp = sub.add_parser("run", help="one closed-loop overtake episode")
    add_common(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("montecarlo", help="trials across disturbance levels")
    add_common(sp)
    sp.add_argument("--levels", type=int, default=10)
    sp.add_argument("--trials", type=int, default=10)
    sp.set_defaults(func=cmd_montecarlo)

    sp = sub.add_parser("sweep", help="QP relaxation conditioning grid")
    add_common(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("bounds", help="settling-time / domain calculator")
    sp.add_argument("--c1", type=float, required=True)
    sp.add_argument("--c2", type=float, required=True)
    sp.add_argument("--c3", type=float, required=True)
    sp.add_argument("--mu", type=float, required=True)
    sp.add_argument("--k", type=float, default=1.05)
    sp.add_argument("--v0", type=float, default=None, help="also run the numeric oracle")
    sp.add_argument("--dt", type=float, default=1e-4)
    sp.add_argument(
        "--variant",
        choices=[v.value for v in BoundVariant],
        default=BoundVariant.LEMMA_K2.value,
    )
    sp.set_defaults(func=cmd_bounds)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FxtqpError as exc:
        _error_json(type(exc).__name__, str(exc))
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
