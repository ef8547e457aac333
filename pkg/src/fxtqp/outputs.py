"""Artifact writers: trajectory CSV, summary JSON, and SVG plots.

Every file records the manifest hash so an artifact can be traced back
to the exact configuration and seed that produced it.  CSV floats use
``repr``: the shortest round-trip decimal form, which makes the files
byte-identical across runs with the same manifest.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from . import __version__
from .scenario import (
    OVERTAKE_PHASES,
    Phase,
    ScenarioConfig,
    TrajectoryLog,
    phase_time_budget,
)

__all__ = [
    "RunManifest",
    "TRAJECTORY_COLUMNS",
    "write_trajectory_csv",
    "write_summary_json",
    "write_plots",
    "write_table_csv",
]

TRAJECTORY_COLUMNS = (
    "t",
    "x_e",
    "y_e",
    "theta_e",
    "v_e",
    "x_l",
    "y_l",
    "v_l",
    "x_oc",
    "y_oc",
    "v_oc",
    "omega",
    "a",
    "delta1",
    "delta2",
    "delta3",
    "V",
    "h_lane",
    "h_lead",
    "phase",
    "qp_status",
)


@dataclass(frozen=True)
class RunManifest:
    """What produced a set of artifacts: experiment kind, config, seed, version."""

    experiment: str
    config: dict  # full dict form of the resolved ScenarioConfig
    seed: int
    out_dir: str
    config_path: str | None = None
    version: str = __version__

    def hash(self) -> str:
        """Hash of the reproducibility-relevant fields (paths excluded)."""
        payload = json.dumps(
            {
                "experiment": self.experiment,
                "config": self.config,
                "seed": self.seed,
                "version": self.version,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()

    def write(self, path: str | Path) -> None:
        doc = {
            "experiment": self.experiment,
            "config": self.config,
            "seed": self.seed,
            "out_dir": self.out_dir,
            "config_path": self.config_path,
            "version": self.version,
            "manifest_sha256": self.hash(),
        }
        Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _fmt(x: float) -> str:
    return repr(float(x))


def write_trajectory_csv(path: str | Path, log: TrajectoryLog, manifest_hash: str) -> None:
    lines = [f"# manifest_sha256={manifest_hash}", ",".join(TRAJECTORY_COLUMNS)]
    for i in range(log.t.shape[0]):
        e, l, o = log.ego[i], log.lead[i], log.oncoming[i]
        row = (
            _fmt(log.t[i]),
            _fmt(e[0]),
            _fmt(e[1]),
            _fmt(e[2]),
            _fmt(e[3]),
            _fmt(l[0]),
            _fmt(l[1]),
            _fmt(l[3]),
            _fmt(o[0]),
            _fmt(o[1]),
            _fmt(o[3]),
            _fmt(log.control[i, 0]),
            _fmt(log.control[i, 1]),
            _fmt(log.slack[i, 0]),
            _fmt(log.slack[i, 1]),
            _fmt(log.slack[i, 2]),
            _fmt(log.clf[i]),
            _fmt(log.h_lane[i]),
            _fmt(log.h_lead[i]),
            str(int(log.phase[i])),
            str(int(log.qp_status[i])),
        )
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return x


def episode_summary(log: TrajectoryLog, cfg: ScenarioConfig) -> dict:
    phases = {}
    for p in OVERTAKE_PHASES:
        phases[p.name.lower()] = {
            "T_budget": phase_time_budget(p, cfg),
            "T_actual": _jsonable(log.phase_times.get(p, math.nan)),
            "converged": log.phase_converged[p],
        }
    return {
        "status": log.status,
        "initiated": log.initiated,
        "phases": phases,
        "c3_star": _jsonable(log.c3_star),
        "min_h_lane": _jsonable(log.min_h_lane),
        "min_h_lead": _jsonable(log.min_h_lead),
        "decision_log": [
            {k: _jsonable(v) for k, v in d.items()} for d in log.decisions
        ],
        "seeds": log.seeds,
    }


def write_summary_json(
    path: str | Path, log: TrajectoryLog, cfg: ScenarioConfig, manifest_hash: str
) -> None:
    doc = episode_summary(log, cfg)
    doc["manifest_sha256"] = manifest_hash
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _save_svg(fig, path: Path, manifest_hash: str) -> None:
    fig.savefig(
        path,
        format="svg",
        metadata={"Description": f"manifest_sha256={manifest_hash}"},
    )
    plt.close(fig)


def write_plots(out_dir: str | Path, log: TrajectoryLog, manifest_hash: str) -> list[Path]:
    """Paths, inputs, and certificate traces as three SVG files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    fig, ax = plt.subplots(figsize=(9, 3))
    ax.plot(log.ego[:, 0], log.ego[:, 1], label="ego")
    ax.plot(log.lead[:, 0], log.lead[:, 1], label="lead", linestyle="--")
    ax.plot(log.oncoming[:, 0], log.oncoming[:, 1], label="oncoming", linestyle=":")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.legend(loc="best")
    ax.set_title("vehicle paths")
    fig.tight_layout()
    p = out / "paths.svg"
    _save_svg(fig, p, manifest_hash)
    written.append(p)

    fig, axes = plt.subplots(2, 1, figsize=(9, 4), sharex=True)
    axes[0].plot(log.t, log.control[:, 0])
    axes[0].set_ylabel("omega [rad/s]")
    axes[1].plot(log.t, log.control[:, 1])
    axes[1].set_ylabel("a [m/s^2]")
    axes[1].set_xlabel("t [s]")
    fig.suptitle("control inputs")
    fig.tight_layout()
    p = out / "inputs.svg"
    _save_svg(fig, p, manifest_hash)
    written.append(p)

    fig, axes = plt.subplots(2, 1, figsize=(9, 4), sharex=True)
    axes[0].plot(log.t, log.clf)
    axes[0].axhline(0.0, color="k", linewidth=0.5)
    axes[0].set_ylabel("V")
    axes[1].plot(log.t, log.h_lane, label="lane")
    axes[1].plot(log.t, log.h_lead, label="headway")
    axes[1].axhline(0.0, color="k", linewidth=0.5)
    axes[1].set_ylabel("h")
    axes[1].set_xlabel("t [s]")
    axes[1].legend(loc="best")
    fig.suptitle("certificate traces")
    fig.tight_layout()
    p = out / "certificates.svg"
    _save_svg(fig, p, manifest_hash)
    written.append(p)

    return written


def write_table_csv(
    path: str | Path, columns: tuple[str, ...], rows: list[tuple], manifest_hash: str
) -> None:
    """Generic results table (Monte Carlo levels, conditioning sweep)."""
    lines = [f"# manifest_sha256={manifest_hash}", ",".join(columns)]
    for row in rows:
        lines.append(
            ",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row)
        )
    Path(path).write_text("\n".join(lines) + "\n")


def plot_scatter(
    path: str | Path,
    x: list[float],
    y: list[float],
    xlabel: str,
    ylabel: str,
    title: str,
    manifest_hash: str,
) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(x, y, "o", markersize=4)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    fig.tight_layout()
    _save_svg(fig, Path(path), manifest_hash)
