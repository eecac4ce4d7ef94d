"""Size, duplication, and complexity metrics over process repositories.

Activity nodes are tasks plus sub-process calls; that denominator is what
makes the duplication rate comparable across repositories of different
shapes. Duplicates count every occurrence of a repeated normalized label
("all", the default) or only the surplus occurrences ("extra").
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

from .model import ProcessRepository, activity_nodes

DUP_CONVENTIONS = ("all", "extra")


def cnc_ratio(arc_count: int, node_count: int) -> float:
    """Coefficient of network complexity: arcs over nodes."""
    if node_count == 0:
        raise ValueError("cnc undefined for zero nodes")
    return arc_count / node_count


def duplication_share(duplicates: int, activities: int) -> float:
    return duplicates / activities if activities else 0.0


def round_half_up(value: float) -> int:
    """Round to nearest integer, ties away from zero: 0.5 -> 1, -0.5 -> -1."""
    return int(Decimal(repr(value)).quantize(Decimal("1"), rounding=ROUND_HALF_UP))


def format_percent(fraction: float) -> str:
    return f"{round_half_up(fraction * 100)}%"


def label_histogram(repo: ProcessRepository) -> Counter:
    return Counter(label for _, _, label in activity_nodes(repo))


def duplicate_occurrences(repo: ProcessRepository, convention: str = "all") -> int:
    if convention not in DUP_CONVENTIONS:
        raise ValueError(f"unknown duplicate convention {convention!r}")
    counts = label_histogram(repo)
    if convention == "all":
        return sum(m for m in counts.values() if m >= 2)
    return sum(m - 1 for m in counts.values() if m >= 2)


def duplication_rate(repo: ProcessRepository, convention: str = "all") -> float:
    return duplication_share(duplicate_occurrences(repo, convention), len(activity_nodes(repo)))


@dataclass(frozen=True)
class MetricsReport:
    model_count: int
    main_count: int
    subprocess_count: int
    activity_node_count: int
    duplicate_occurrences: int
    duplication_rate: float
    arc_count: int
    node_count: int
    cnc: float


def compute_metrics(repo: ProcessRepository, convention: str = "all") -> MetricsReport:
    main_count = sum(1 for d in repo.definitions if d.level == 2)
    activities = len(activity_nodes(repo))
    duplicates = duplicate_occurrences(repo, convention)
    arcs = sum(len(d.flows) for d in repo.definitions)
    nodes = sum(len(d.nodes) for d in repo.definitions)
    return MetricsReport(
        model_count=len(repo.definitions),
        main_count=main_count,
        subprocess_count=len(repo.definitions) - main_count,
        activity_node_count=activities,
        duplicate_occurrences=duplicates,
        duplication_rate=duplication_share(duplicates, activities),
        arc_count=arcs,
        node_count=nodes,
        cnc=cnc_ratio(arcs, nodes),
    )


def _relative_pct(after: int | float, before: int | float) -> float | None:
    if not before:
        return None
    return (after - before) / before * 100


@dataclass(frozen=True)
class CompareDeltas:
    """Relative change of the consolidated repository against the fragmented
    one. Percent values are exact; renderers round. Rate delta is in
    percentage points."""

    activity_nodes_pct: float | None
    subprocess_models_pct: float | None
    duplication_rate_pts: float
    cnc_pct: float | None


@dataclass(frozen=True)
class CompareReport:
    consolidated: MetricsReport
    fragmented: MetricsReport
    deltas: CompareDeltas


def compare_report(
    consolidated: ProcessRepository,
    fragmented: ProcessRepository,
    convention: str = "all",
) -> CompareReport:
    after = compute_metrics(consolidated, convention)
    before = compute_metrics(fragmented, convention)
    deltas = CompareDeltas(
        activity_nodes_pct=_relative_pct(after.activity_node_count, before.activity_node_count),
        subprocess_models_pct=_relative_pct(after.subprocess_count, before.subprocess_count),
        duplication_rate_pts=(after.duplication_rate - before.duplication_rate) * 100,
        cnc_pct=_relative_pct(after.cnc, before.cnc),
    )
    return CompareReport(after, before, deltas)
