"""Run artifacts: metric CSVs, seed summaries, and figure rendering.

Metric files are deliberately plain: one header line, repr-formatted floats,
newline-terminated rows. Two runs with the same config and seed produce
byte-identical files except for the elapsed_ms column, which is wall-clock
and excluded from any determinism comparison.
"""

from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .diagnostics import CheckRow
from .learner import IterationRow

METRIC_HEADER = ("iteration", "return", "grad_norm", "mean_abs_invlink",
                 "elapsed_ms")
DIAG_HEADER = ("suite", "name", "lhs", "relation", "rhs", "tolerance", "status")


def _fmt(x: float) -> str:
    return repr(float(x))


def write_metrics(path, rows: list[IterationRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRIC_HEADER)
        for r in rows:
            writer.writerow([r.iteration, _fmt(r.ret), _fmt(r.grad_norm),
                             _fmt(r.mean_abs_invlink), _fmt(r.elapsed_ms)])


def read_metrics(path) -> list[IterationRow]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != METRIC_HEADER:
            raise ValueError(f"unrecognized metric header in {path}: {header}")
        return [IterationRow(int(it), float(ret), float(gn), float(mai),
                             float(ms))
                for it, ret, gn, mai, ms in reader]


def write_summary(path, finals: dict[int, float]) -> None:
    """Final-return summary across seeds: one row per seed plus aggregate."""
    values = np.array([finals[s] for s in sorted(finals)], dtype=float)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("seed", "final_return"))
        for s in sorted(finals):
            writer.writerow([s, _fmt(finals[s])])
        writer.writerow(("mean", _fmt(values.mean())))
        writer.writerow(("std", _fmt(values.std(ddof=1) if len(values) > 1 else 0.0)))


def write_diagnostics(path, rows: list[CheckRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(DIAG_HEADER)
        for r in rows:
            writer.writerow([r.suite, r.name, _fmt(r.lhs), r.relation,
                             _fmt(r.rhs), _fmt(r.tolerance),
                             "PASS" if r.passed else "FAIL"])


# -- figures -------------------------------------------------------------------

def learning_curve_figure(path, curves: dict[int, list[IterationRow]]) -> None:
    """Per-seed learning curves plus the cross-seed mean with a std band."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    common = None
    for seed in sorted(curves):
        rows = curves[seed]
        its = np.array([r.iteration for r in rows])
        rets = np.array([r.ret for r in rows])
        ax.plot(its, rets, alpha=0.35, lw=1.0, label=f"seed {seed}")
        common = its if common is None else common[np.isin(common, its)]
    if common is not None and len(curves) > 1 and common.size:
        stack = np.array([
            [r.ret for r in curves[s] if r.iteration in set(common)]
            for s in sorted(curves)
        ])
        mean, std = stack.mean(axis=0), stack.std(axis=0)
        ax.plot(common, mean, color="black", lw=2.0, label="mean")
        ax.fill_between(common, mean - std, mean + std, color="black", alpha=0.15)
    ax.set_xlabel("iteration")
    ax.set_ylabel("discounted return")
    ax.legend(fontsize=8, ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def gradient_norm_figure(path, curves: dict[int, list[IterationRow]]) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for seed in sorted(curves):
        rows = curves[seed]
        ax.plot([r.iteration for r in rows], [r.grad_norm for r in rows],
                alpha=0.6, lw=1.0, label=f"seed {seed}")
    ax.set_xlabel("iteration")
    ax.set_ylabel("estimated gradient norm")
    ax.set_yscale("log")
    ax.legend(fontsize=8, ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def diagnostics_figure(path, rows: list[CheckRow]) -> None:
    """One marker per check: signed margin to its bound, colored by verdict.

    Margins are normalized by max(|lhs|, |rhs|, 1e-12) so checks on very
    different scales share an axis; positive means the check holds. Suites
    with many rows (the bound sweep has hundreds) drop per-row labels and
    render an indexed scatter instead of bars.
    """
    margins, colors = [], []
    for r in rows:
        scale = max(abs(r.lhs), abs(r.rhs), 1e-12)
        raw = (r.lhs - r.rhs) if r.relation == ">" else (r.rhs - r.lhs)
        margins.append(raw / scale)
        colors.append("tab:green" if r.passed else "tab:red")
    if len(rows) > 60:
        fig, ax = plt.subplots(figsize=(8, 4.5))
        ax.scatter(np.arange(len(rows)), margins, c=colors, s=12)
        ax.axhline(0.0, color="black", lw=0.8)
        ax.set_xlabel("check index")
        ax.set_ylabel("normalized margin (positive = holds)")
    else:
        fig, ax = plt.subplots(figsize=(8, max(3.0, 0.22 * len(rows))))
        y = np.arange(len(rows))
        ax.barh(y, margins, color=colors, height=0.7)
        ax.axvline(0.0, color="black", lw=0.8)
        ax.set_yticks(y, [f"{r.suite}/{r.name}" for r in rows], fontsize=6)
        ax.invert_yaxis()
        ax.set_xlabel("normalized margin (positive = holds)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def run_directory(base: str) -> str:
    os.makedirs(base, exist_ok=True)
    return base
