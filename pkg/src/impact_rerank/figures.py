"""Figure rendering for benchmark reports.

Figures are written next to the delimited output as PNG files; the CSV
stays the canonical artifact and plotting never touches the timing path.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .bench import LatencyBreakdown, SweepRow


def render_sweep_figure(sweep: list[SweepRow], path: str | Path) -> None:
    """Latency/effectiveness trade-off across re-ranking cut-offs.

    With metric values present the x-axis is total latency and the y-axis
    the metric, one point per k; without them the figure falls back to
    latency versus k.
    """
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    has_metric = all(row.metric is not None for row in sweep) and sweep
    if has_metric:
        xs = [row.total_ms for row in sweep]
        ys = [row.metric for row in sweep]
        ax.plot(xs, ys, marker="o", color="tab:green")
        for row, x, y in zip(sweep, xs, ys):
            ax.annotate(str(row.k), (x, y), textcoords="offset points", xytext=(4, 4), fontsize=8)
        ax.set_xlabel("total latency per query (ms)")
        ax.set_ylabel(sweep[0].metric_name or "metric")
    else:
        ax.plot([row.k for row in sweep], [row.total_ms for row in sweep], marker="o")
        ax.set_xlabel("re-ranking cut-off k")
        ax.set_ylabel("total latency per query (ms)")
    ax.set_title("re-ranking cut-off sweep")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_breakdown_figure(breakdown: LatencyBreakdown, path: str | Path) -> None:
    """Horizontal bars of per-stage mean latency."""
    stages = [
        ("query process", breakdown.query_process.mean_ms),
        ("retrieval", breakdown.retrieval.mean_ms),
        ("re-rank", breakdown.rerank.mean_ms),
        ("total", breakdown.total_mean_ms),
    ]
    fig, ax = plt.subplots(figsize=(6.0, 3.2))
    names = [name for name, _ in stages]
    values = [value for _, value in stages]
    bars = ax.barh(names, values, color=["tab:blue"] * 3 + ["tab:gray"])
    ax.bar_label(bars, fmt="%.3f")
    ax.set_xlabel("mean latency per query (ms)")
    ax.set_title(f"stage breakdown over {breakdown.queries} queries (cut-off {breakdown.cutoff})")
    ax.invert_yaxis()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
