"""Figure rendering for runs, comparisons and sweeps.

Everything draws straight to files through the Agg backend, so this
works headless; callers pass the output path and get no figure handles
back.  The CLI renders these next to the CSV output unless asked not to.
"""

from __future__ import annotations

from typing import Dict, List

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from . import controller as ctl  # noqa: E402
from .experiments import (CompareReport, RunResult, SweepReport,  # noqa: E402
                          ROLE_REFERENCE, ROLE_RUN)


def plot_run(result: RunResult, path: str) -> None:
    """Committed energy per iteration, with raw measurements and the
    exact ground energy for scale; reject decisions are marked."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    iters = np.arange(len(result.committed))
    raw = [r.E_m for r in result.records]
    ax.plot([r.i for r in result.records], raw, ".", color="0.75", ms=3,
            label="measured")
    ax.plot(iters, result.committed, color="C0", lw=1.5, label="committed")
    rejects = [r.i for r in result.records if r.decision == ctl.REJECT]
    if rejects:
        ymin = float(min(min(raw), result.exact_ground))
        ax.plot(rejects, [ymin] * len(rejects), "|", color="C3", ms=8,
                label="rejected")
    ax.axhline(result.exact_ground, color="k", ls="--", lw=1,
               label="exact ground")
    ax.set_xlabel("iteration")
    ax.set_ylabel("energy")
    ax.set_title(f"{result.scheme} (seed {result.seed})")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _median_trajectories(report: CompareReport) -> Dict[str, np.ndarray]:
    out = {}
    for scheme in report.schemes:
        stack = np.stack([report.results[(scheme, s)].committed
                          for s in report.seeds])
        out[scheme] = np.median(stack, axis=0)
    return out


def plot_compare(report: CompareReport, path: str) -> None:
    """Median committed trajectory per scheme plus median final ratios."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.5),
                                   gridspec_kw={"width_ratios": [2, 1]})
    trajectories = _median_trajectories(report)
    for i, scheme in enumerate(report.schemes):
        ax1.plot(trajectories[scheme], lw=1.3, color=f"C{i}", label=scheme)
    any_result = next(iter(report.results.values()))
    ax1.axhline(any_result.exact_ground, color="k", ls="--", lw=1,
                label="exact ground")
    ax1.set_xlabel("iteration")
    ax1.set_ylabel("median committed energy")
    ax1.legend(fontsize=8)
    ratios = [report.median_ratio[s] for s in report.schemes]
    shown = [min(r, 10.0) if np.isfinite(r) else 10.0 for r in ratios]
    ax2.bar(range(len(report.schemes)), shown,
            color=[f"C{i}" for i in range(len(report.schemes))])
    ax2.axhline(1.0, color="k", lw=1)
    ax2.set_xticks(range(len(report.schemes)))
    ax2.set_xticklabels(report.schemes, rotation=30, ha="right", fontsize=8)
    ax2.set_ylabel("median improvement ratio (clipped at 10)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_sweep(report: SweepReport, path: str) -> None:
    """Final energy against the swept parameter, median across seeds.

    threshold sweeps add the measured skip fraction on a second axis;
    bond_length sweeps add the noise-free reference curve.
    """
    runs: Dict[float, List[RunResult]] = {}
    refs: Dict[float, List[RunResult]] = {}
    for pt in report.points:
        bucket = runs if pt.role == ROLE_RUN else refs
        bucket.setdefault(pt.grid_value, []).append(pt.result)
    grid = sorted(runs)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    finals = [float(np.median([r.summary.final_energy for r in runs[v]]))
              for v in grid]
    ax.plot(grid, finals, "o-", color="C0", label="final energy")
    if refs:
        ref_finals = [float(np.median([r.summary.final_energy
                                       for r in refs[v]]))
                      for v in grid if v in refs]
        ax.plot([v for v in grid if v in refs], ref_finals, "s--",
                color="0.5", label="noise-free reference")
    exact = [float(np.median([r.summary.exact_ground_energy
                              for r in runs[v]])) for v in grid]
    ax.plot(grid, exact, ":", color="k", lw=1, label="exact ground")
    if report.kind == "threshold":
        ax2 = ax.twinx()
        skip = [float(np.median(
            [r.summary.skip_count / len(r.committed) for r in runs[v]]))
            for v in grid]
        ax2.plot(grid, skip, "^-", color="C3", label="skip fraction")
        ax2.plot(grid, grid, "--", color="C3", lw=0.8, alpha=0.5)
        ax2.set_ylabel("measured skip fraction")
        ax2.legend(loc="lower right", fontsize=8)
    ax.set_xlabel(report.kind.replace("_", " "))
    ax.set_ylabel("energy")
    ax.set_title(f"{report.kind} sweep")
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
