"""Chart rendering for metric and comparison reports.

matplotlib is imported lazily so that library use never pays the import cost;
the Agg backend keeps rendering headless. Each function writes PNG files into
the given directory and returns the written paths.
"""

from __future__ import annotations

import os

from .metrics import CompareReport, MetricsReport


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_metrics_figures(report: MetricsReport, directory: str) -> list[str]:
    plt = _pyplot()
    os.makedirs(directory, exist_ok=True)
    written: list[str] = []

    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    names = ["models", "activities", "duplicates"]
    values = [report.model_count, report.activity_node_count, report.duplicate_occurrences]
    axes[0].bar(names, values, color=["#4878a8", "#6aa84f", "#cc4125"])
    axes[0].set_title("Size")
    for i, v in enumerate(values):
        axes[0].text(i, v, str(v), ha="center", va="bottom")
    axes[1].bar(["duplication", "cnc"], [report.duplication_rate * 100, report.cnc * 100])
    axes[1].set_title("Duplication % / CNC x100")
    fig.tight_layout()
    path = os.path.join(directory, "metrics_overview.png")
    fig.savefig(path)
    plt.close(fig)
    written.append(path)
    return written


def render_compare_figures(report: CompareReport, directory: str) -> list[str]:
    plt = _pyplot()
    os.makedirs(directory, exist_ok=True)
    written: list[str] = []
    cons, frag = report.consolidated, report.fragmented

    fig, ax = plt.subplots(figsize=(8, 4.5))
    names = ["activities", "models", "sub-processes", "duplicates"]
    before = [frag.activity_node_count, frag.model_count, frag.subprocess_count, frag.duplicate_occurrences]
    after = [cons.activity_node_count, cons.model_count, cons.subprocess_count, cons.duplicate_occurrences]
    xs = range(len(names))
    width = 0.38
    ax.bar([x - width / 2 for x in xs], before, width, label="fragmented", color="#b45f06")
    ax.bar([x + width / 2 for x in xs], after, width, label="consolidated", color="#3d85c6")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(names)
    ax.set_title("Repository size")
    ax.legend()
    fig.tight_layout()
    path = os.path.join(directory, "compare_size.png")
    fig.savefig(path)
    plt.close(fig)
    written.append(path)

    fig, axes = plt.subplots(1, 2, figsize=(8, 4))
    axes[0].bar(["fragmented", "consolidated"], [frag.duplication_rate * 100, cons.duplication_rate * 100],
                color=["#b45f06", "#3d85c6"])
    axes[0].set_title("Duplication rate (%)")
    axes[1].bar(["fragmented", "consolidated"], [frag.cnc, cons.cnc], color=["#b45f06", "#3d85c6"])
    axes[1].set_title("CNC")
    fig.tight_layout()
    path = os.path.join(directory, "compare_tradeoff.png")
    fig.savefig(path)
    plt.close(fig)
    written.append(path)
    return written
