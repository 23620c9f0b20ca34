"""Figures written next to the delimited reports."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from prevfuse.evaluation import EvaluationSummary  # noqa: E402
from prevfuse.prevalence import WeightVector  # noqa: E402
from prevfuse.rounding import fmt  # noqa: E402

COLORS = {"weighted": "#1f77b4", "equal": "#bbbbbb"}


def plot_cases(summary: EvaluationSummary, path: str | Path) -> Path:
    """Grouped bars of weighted vs equal-weight score per case."""
    path = Path(path)
    cases = summary.cases
    fig, ax = plt.subplots(figsize=(max(4.0, 1.4 * len(cases) + 2), 3.6))
    x = range(len(cases))
    ax.bar([i - 0.2 for i in x], [c.f_w for c in cases], 0.4, label="prevalence-weighted", color=COLORS["weighted"])
    ax.bar([i + 0.2 for i in x], [c.f_r for c in cases], 0.4, label="equal weights", color=COLORS["equal"])
    for i, c in enumerate(cases):
        if c.rel_diff_pct is not None:
            top = max(c.f_w, c.f_r)
            ax.annotate(f"{fmt(c.rel_diff_pct, 1)}%", (i, top), xytext=(0, 4),
                        textcoords="offset points", ha="center", fontsize=8)
    ax.set_xticks(list(x))
    ax.set_xticklabels(
        [f"{c.case}\n{''.join(map(str, c.pattern))} {c.truth[:3]}\nn={c.occurrences}" for c in cases], fontsize=8
    )
    ax.set_ylim(0, 1.12)
    ax.set_ylabel("fused score")
    agg = summary.weighted_improvement_pct
    title = f"pattern order {','.join(summary.weights_used.mode_order)}"
    if agg is not None:
        title += f"; weighted improvement {fmt(agg, 1)}%"
    ax.set_title(title, fontsize=9)
    ax.legend(fontsize=8, frameon=False, loc="upper right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_weights(weights: WeightVector, path: str | Path) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(max(3.0, 0.9 * len(weights) + 1.5), 3.0))
    ax.bar(weights.mode_order, weights.values(), color=COLORS["weighted"])
    ax.axhline(1.0 / len(weights), color="k", lw=0.8, ls="--", label="equal weight")
    for i, w in enumerate(weights.values()):
        ax.annotate(fmt(w, 2), (i, w), xytext=(0, 3), textcoords="offset points", ha="center", fontsize=8)
    ax.set_ylim(0, 1)
    ax.set_ylabel("weight")
    ax.legend(fontsize=8, frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
