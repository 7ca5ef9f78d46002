"""Static convergence figures written next to the trace CSVs.

Figures are built on the object API (no pyplot state), so batched runs can
render from worker threads.
"""
from __future__ import annotations

import os

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

FIGSIZE = (6.0, 3.8)
DPI = 150


def _positive(values):
    # log axes cannot show exact zeros
    v = np.asarray(values, dtype=float)
    return np.where(v > 0, v, np.nan)


def plot_trace(trace, path: str, title: str | None = None) -> str:
    """Residuals dist(x_n, T_i x_n) and dist(x_n, F) against n, log scale."""
    n = [r.n for r in trace.records]
    R = np.array([r.residuals for r in trace.records])
    fig = Figure(figsize=FIGSIZE)
    FigureCanvasAgg(fig)
    ax = fig.add_subplot()
    for i in range(3):
        ax.semilogy(n, _positive(R[:, i]), lw=1.0, label=f"dist(x, T{i + 1} x)")
    dF = [r.dist_F for r in trace.records]
    if all(v is not None for v in dF):
        ax.semilogy(n, _positive(dF), "k--", lw=1.0, label="dist(x, F)")
    ax.set_xlabel("n", fontsize=9)
    ax.set_ylabel("distance", fontsize=9)
    ax.set_title(title or f"{trace.problem} / {trace.schedule}, mode {trace.mode}", fontsize=9)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    tmp = path + ".tmp.png"
    fig.savefig(tmp, dpi=DPI)
    os.replace(tmp, path)
    return path
