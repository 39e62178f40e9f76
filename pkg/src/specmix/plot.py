"""Render sweep results as misclustering-vs-r2~ curves (one panel per r1~)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .sweep import aggregate_results, read_csv

__all__ = ["emit_plot"]


def emit_plot(csv_path, out_path) -> dict:
    """Write a self-contained SVG of per-method mean curves with standard-error
    bars; returns the aggregation used, so callers can audit the numbers.
    Axes are linear (recorded in the document metadata)."""
    rows = read_csv(csv_path)
    agg = aggregate_results(rows)
    panels = sorted({key[0] for key in agg})
    methods = sorted({key[2] for key in agg})

    fig, axes = plt.subplots(
        1, max(len(panels), 1), figsize=(4.2 * max(len(panels), 1), 3.4), squeeze=False
    )
    for ax, r1 in zip(axes[0], panels or [None]):
        if r1 is None:
            continue
        for method in methods:
            xs = sorted(k[1] for k in agg if k[0] == r1 and k[2] == method)
            if not xs:
                continue
            ys = [agg[(r1, x, method)]["mean"] for x in xs]
            es = [agg[(r1, x, method)]["stderr"] for x in xs]
            ax.errorbar(xs, ys, yerr=es, marker="o", capsize=2, label=method)
        ax.set_title(f"r1~ = {r1}")
        ax.set_xlabel("r2~")
        ax.set_ylabel("misclustering rate")
        ax.legend(fontsize=8)
    if not panels:
        axes[0][0].set_xlabel("r2~")
        axes[0][0].set_ylabel("misclustering rate")
    fig.tight_layout()
    fig.savefig(
        out_path,
        format="svg",
        metadata={
            "Description": (
                "mean misclustering over replicates with standard-error bars; "
                "linear axes"
            )
        },
    )
    plt.close(fig)
    return agg
