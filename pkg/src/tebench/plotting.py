"""Optional figure rendering for scenario reports.

Figures are a convenience layer on top of the delimited report stream: the
records stay the source of truth and figures are only written when a target
directory is supplied (the CLI's -plot flag).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .model import ScenarioReport


def render_report_figures(report: ScenarioReport, out_dir: str | Path) -> list[Path]:
    """Write the figures appropriate for the report's scenario; returns paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    solver = report.records[0].solver if report.records else "unknown"
    base = out / f"{report.scenario}_{solver}"
    written: list[Path] = []

    if report.scenario in ("SingleSolverRun", "MaxCongestion"):
        written.append(_utilization_figure(report, base))
    elif report.scenario == "Overhead":
        written.append(_overhead_figure(report, base))
    elif report.scenario == "Robustness":
        written.append(_robustness_figure(report, base))
    return written


def _utilization_figure(report: ScenarioReport, base: Path) -> Path:
    posts = [r.post_max_utilization for r in report.records]
    bounds = [r.lower_bound for r in report.records]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.boxplot([posts], tick_labels=["post"], whis=(0, 100))
    ax.scatter([1] * len(bounds), bounds, marker="_", s=200, color="tab:red",
               label="lower bound")
    ax.set_ylabel("max link utilization")
    ax.set_title(f"{report.scenario}: {report.records[0].solver}")
    ax.legend(loc="best")
    path = base.with_suffix(".png")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def _overhead_figure(report: ScenarioReport, base: Path) -> Path:
    labels = [r.setting_id for r in report.records]
    fractions = [
        r.overhead.rerouted_sr_fraction if r.overhead else 0.0
        for r in report.records
    ]
    fig, ax = plt.subplots(figsize=(max(5, len(labels)), 4))
    ax.bar(range(len(labels)), fractions, color="tab:blue")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=8)
    ax.set_ylabel("fraction of demands rerouted")
    ax.set_ylim(0, 1)
    ax.set_title(f"Overhead: {report.records[0].solver}")
    path = base.with_suffix(".png")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def _robustness_figure(report: ScenarioReport, base: Path) -> Path:
    utils: list[float] = []
    for rec in report.records:
        if rec.failures:
            utils.extend(f.post_failure_utilization for f in rec.failures.records)
    fig, ax = plt.subplots(figsize=(5, 4))
    if utils:
        ax.hist(utils, bins=min(20, max(5, len(utils))), color="tab:blue")
    ax.axvline(1.0, color="tab:red", linestyle="--", label="congestion")
    ax.set_xlabel("post-failure max link utilization")
    ax.set_ylabel("failures")
    ax.set_title(f"Robustness: {report.records[0].solver}")
    ax.legend(loc="best")
    path = base.with_suffix(".png")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path
