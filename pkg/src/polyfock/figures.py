"""Static figures for the report path.

Everything renders through the Agg backend straight to files; nothing here
opens a window.  Three figures accompany the delimited summary: Cesaro
convergence of the smoothed Fourier sums, the creation-weight ratio
approaching its limit, and a residual overview across all checks.
"""
from __future__ import annotations

import math
from pathlib import Path
from typing import List, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .basis import TruncationSpec, weight_b
from .operators import max_abs
from .sampling import random_toeplitz
from .suites import Report
from .toeplitz import fejer_sum

RESIDUAL_FLOOR = 1e-17


def fejer_convergence_figure(spec: TruncationSpec, seed: int, path: Path) -> Path:
    """Max-entry error of the Cesaro-smoothed sums against the operator."""
    T = random_toeplitz(spec, seed)
    base = max_abs(T)
    multiples = [1, 2, 4, 8, 16, 32]
    errors = []
    for c in multiples:
        N = tuple(c * Li for Li in spec.L)
        errors.append(max_abs(fejer_sum(spec, T, N) - np.asarray(T)) / base)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.loglog([c * max(spec.L) for c in multiples], errors, "o-", color="#1f77b4")
    ax.set_xlabel("smoothing order N")
    ax.set_ylabel("relative max-entry error")
    ax.set_title("Cesaro-smoothed Fourier sums")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def weight_ratio_figure(path: Path, m: int = 2, t_max: int = 64) -> Path:
    """Ratio of creation weights along a lengthening word, with its limit."""
    ts = np.arange(1, t_max + 1)
    ratios = np.array(
        [
            math.sqrt(weight_b(m, int(t)) / weight_b(m, int(t) + 1))
            / math.sqrt(weight_b(m, 0) / weight_b(m, 1))
            for t in ts
        ]
    )
    limit = math.sqrt(weight_b(m, 1))
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(ts, ratios, "o-", ms=3, color="#2ca02c", label="weight ratio")
    ax.axhline(limit, color="#d62728", ls="--", label=f"limit sqrt({weight_b(m, 1)})")
    ax.set_xlabel("word length t")
    ax.set_ylabel("ratio")
    ax.set_title(f"Creation-weight ratio, order m={m}")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def residual_summary_figure(reports: Sequence[Report], path: Path) -> Path:
    """Log-scale bar chart of every check residual across the suites."""
    labels = []
    values = []
    colors = []
    for rep in reports:
        for c in rep.checks:
            labels.append(f"{rep.suite}:{c.name}")
            values.append(max(c.residual, RESIDUAL_FLOOR))
            colors.append("#2ca02c" if c.passed else "#d62728")
    y = np.arange(len(labels))
    fig, ax = plt.subplots(figsize=(7.0, 0.35 * len(labels) + 1.5))
    ax.barh(y, values, color=colors)
    ax.set_yticks(y)
    ax.set_yticklabels(labels, fontsize=8)
    ax.set_xscale("log")
    ax.set_xlabel("residual (floored at 1e-17)")
    ax.set_title("Check residuals")
    ax.invert_yaxis()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_report_figures(
    spec: TruncationSpec, seed: int, reports: Sequence[Report], out_dir: Path
) -> List[Path]:
    out_dir = Path(out_dir)
    return [
        fejer_convergence_figure(spec, seed, out_dir / "fejer_convergence.png"),
        weight_ratio_figure(out_dir / "weight_ratio_limit.png"),
        residual_summary_figure(reports, out_dir / "residual_summary.png"),
    ]
