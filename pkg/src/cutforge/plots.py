"""Figure rendering for the report path (written next to the CSV output)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_bound_trace(trace_rows, path: str, title: str = "") -> str:
    """Bound progression across pipeline stages / cut rounds."""
    stages = [str(r[0]) for r in trace_rows]
    bounds = [float(r[2]) for r in trace_rows]
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    ax.plot(range(len(bounds)), bounds, marker="o", lw=1.4)
    ax.set_xticks(range(len(bounds)))
    ax.set_xticklabels(stages, rotation=30, ha="right", fontsize=8)
    ax.set_xlabel("stage")
    ax.set_ylabel("LP bound")
    ax.grid(alpha=0.3)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_moment_spectrum(point, path: str, title: str = "") -> str:
    """Eigenvalues of the moment matrix at a relaxation point."""
    vals = np.linalg.eigvalsh(point.moment_matrix())
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.axhline(0.0, color="k", lw=0.8)
    ax.stem(range(vals.size), vals)
    ax.set_xlabel("index")
    ax.set_ylabel("eigenvalue")
    ax.grid(alpha=0.3)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_certify_buckets(summary: dict, path: str) -> str:
    """Bucket sizes from a batch certification run."""
    keys = ["bh_count", "sign_certified", "ratio_certified", "inconclusive"]
    labels = ["BH", "sign", "ratio", "inconclusive"]
    vals = [summary.get(k, 0) for k in keys]
    fig, ax = plt.subplots(figsize=(5.4, 3.6))
    bars = ax.bar(labels, vals, color=["#4c72b0", "#55a868", "#c44e52", "#8172b2"])
    for b, v in zip(bars, vals):
        ax.text(b.get_x() + b.get_width() / 2, b.get_height(), str(v),
                ha="center", va="bottom", fontsize=8)
    ax.set_ylabel("facets")
    ax.set_title(f"n={summary.get('n', '?')} facet classification")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
