"""Variation matrix, together/separate decision rules, and variation maps.

A variant group is the set of variants one driver induces on one
sub-process; it is the unit that receives a together/separate verdict.
Group ids are derived, not stored: "<subprocess>:<driver>".
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import TYPE_CHECKING

from graphlib import TopologicalSorter

from .drivers import STRENGTH_ORDER, StrengthRating, VariationDriver, order_drivers
from .model import NodeKind, ProcessDefinition, ProcessNode, SequenceFlow
from .similarity import BAND_ORDER, SimilarityBand

if TYPE_CHECKING:  # import cycle: project.py serializes these types
    from .project import ProjectFile


class VerdictKind(str, Enum):
    TOGETHER = "together"
    SEPARATE = "separate"
    ANALYST_CHOICE = "analyst_choice"


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    # Default used when an analyst choice stays unresolved; analyst_choice only.
    default: VerdictKind | None = None

    def __post_init__(self):
        if self.kind is VerdictKind.ANALYST_CHOICE:
            if self.default not in (VerdictKind.TOGETHER, VerdictKind.SEPARATE):
                raise ValueError("analyst_choice carries a together/separate default")
        elif self.default is not None:
            raise ValueError("only analyst_choice carries a default")

    def effective(self) -> VerdictKind:
        return self.default if self.kind is VerdictKind.ANALYST_CHOICE else self.kind

    def render(self) -> str:
        if self.kind is VerdictKind.ANALYST_CHOICE:
            return f"analyst_choice({self.default.value})"
        return self.kind.value


TOGETHER = Verdict(VerdictKind.TOGETHER)
SEPARATE = Verdict(VerdictKind.SEPARATE)


class LevelOutsideConfig(Exception):
    def __init__(self, level: int):
        self.level = level
        super().__init__(f"level {level} is neither a configured high nor low level")


class MissingBand(Exception):
    def __init__(self, group_id: str):
        self.group_id = group_id
        super().__init__(f"group {group_id!r} has no similarity band")


class DanglingReference(Exception):
    def __init__(self, name: str, context: str = ""):
        self.name = name
        suffix = f" ({context})" if context else ""
        super().__init__(f"reference to unknown {name!r}{suffix}")


@dataclass(frozen=True)
class DecisionConfig:
    high_levels: frozenset[int] = frozenset({3})
    low_levels: frozenset[int] = frozenset({4, 5})
    very_strong_forces_separate: bool = True
    analyst_choice_default_low_dissimilar: VerdictKind = VerdictKind.SEPARATE
    # Off: overrides replace computed analyst-choice verdicts only.
    overrides_replace_any: bool = False

    def __post_init__(self):
        object.__setattr__(self, "high_levels", frozenset(self.high_levels))
        object.__setattr__(self, "low_levels", frozenset(self.low_levels))
        if self.high_levels & self.low_levels:
            raise ValueError("high and low level sets must be disjoint")


@dataclass(frozen=True)
class VariantRecord:
    id: str
    driver: str
    subcategory_path: str
    subprocess: str
    model: str | None = None


@dataclass(frozen=True)
class VariantGroup:
    id: str
    subprocess: str
    driver: str
    variants: tuple[str, ...]
    band: SimilarityBand | None = None

    def __post_init__(self):
        object.__setattr__(self, "variants", tuple(self.variants))
        if len(self.variants) != len(set(self.variants)):
            raise ValueError(f"group {self.id!r} lists a variant twice")


@dataclass(frozen=True)
class DecisionRow:
    group: VariantGroup
    level: int
    strength: StrengthRating
    verdict: Verdict
    rule: str
    source: str  # computed | override


_SIMILAR_BANDS = frozenset({SimilarityBand.IDENTICAL, SimilarityBand.VERY_SIMILAR, SimilarityBand.SIMILAR})
_IMPACT_STRENGTHS = frozenset({StrengthRating.STRONG, StrengthRating.VERY_STRONG})


def _level_is_high(level: int, cfg: DecisionConfig) -> bool:
    if level in cfg.high_levels:
        return True
    # Levels past the configured range count as low decomposition levels.
    if level in cfg.low_levels or (cfg.low_levels and level > max(cfg.low_levels)):
        return False
    raise LevelOutsideConfig(level)


def decide_with_rule(
    strength: StrengthRating,
    band: SimilarityBand,
    level: int,
    cfg: DecisionConfig = DecisionConfig(),
) -> tuple[Verdict, str]:
    """The decision matrix, with the name of the rule that fired."""
    high = _level_is_high(level, cfg)
    if band is SimilarityBand.IDENTICAL:
        return TOGETHER, "identical"
    if cfg.very_strong_forces_separate and strength is StrengthRating.VERY_STRONG:
        return SEPARATE, "very-strong-driver"
    impact = strength in _IMPACT_STRENGTHS
    similar = band in _SIMILAR_BANDS
    if not impact and similar:
        return TOGETHER, "weak-and-similar"
    if impact and not similar:
        return SEPARATE, "strong-and-dissimilar"
    if impact and similar:
        if high:
            return SEPARATE, "strong-and-similar-at-high-level"
        return TOGETHER, "strong-and-similar-at-low-level"
    if high:
        return TOGETHER, "weak-and-dissimilar-at-high-level"
    return (
        Verdict(VerdictKind.ANALYST_CHOICE, cfg.analyst_choice_default_low_dissimilar),
        "weak-and-dissimilar-at-low-level",
    )


def decide(
    strength: StrengthRating,
    band: SimilarityBand,
    level: int,
    cfg: DecisionConfig = DecisionConfig(),
) -> Verdict:
    return decide_with_rule(strength, band, level, cfg)[0]


def derive_groups(project: "ProjectFile") -> list[VariantGroup]:
    """Group variant records by (subprocess, driver); only cells with two or
    more variants form a group. Bands come from the project's assessments,
    manual ones taking precedence over computed ones."""
    ordered: dict[tuple[str, str], list[str]] = {}
    for record in project.variants:
        ordered.setdefault((record.subprocess, record.driver), []).append(record.id)
    manual = {a.group: a.band for a in project.similarity_assessments if a.source == "manual"}
    computed = {a.group: a.band for a in project.similarity_assessments if a.source == "computed"}
    groups = []
    for (subprocess, driver), variants in ordered.items():
        if len(variants) < 2:
            continue
        key = frozenset(variants)
        band = manual.get(key, computed.get(key))
        groups.append(VariantGroup(f"{subprocess}:{driver}", subprocess, driver, tuple(variants), band))
    return groups


def decide_project(project: "ProjectFile") -> dict[str, DecisionRow]:
    """Verdict per variant group. Overrides replace computed analyst-choice
    verdicts; any other override is kept out of the result unless the config
    allows full replacement. Deterministic: result order follows variant
    record order."""
    drivers_by_id = {d.id: d for d in project.drivers}
    cfg = project.config
    rows: dict[str, DecisionRow] = {}
    for group in derive_groups(project):
        if group.band is None:
            raise MissingBand(group.id)
        driver = drivers_by_id.get(group.driver)
        if driver is None:
            raise DanglingReference(group.driver, f"driver of group {group.id}")
        if not project.repository.has(group.subprocess):
            raise DanglingReference(group.subprocess, f"sub-process of group {group.id}")
        level = project.repository.get(group.subprocess).level
        verdict, rule = decide_with_rule(driver.strength, group.band, level, cfg)
        rows[group.id] = DecisionRow(group, level, driver.strength, verdict, rule, "computed")
    for group_id, override in project.decision_overrides:
        row = rows.get(group_id)
        if row is None:
            raise DanglingReference(group_id, "decision override")
        if row.verdict.kind is VerdictKind.ANALYST_CHOICE or cfg.overrides_replace_any:
            rows[group_id] = replace(row, verdict=override, source="override")
    return rows


@dataclass(frozen=True)
class MatrixEntry:
    variant: str
    subcategory_path: str


@dataclass(frozen=True)
class MatrixCell:
    entries: tuple[MatrixEntry, ...]
    band: SimilarityBand | None
    identical: bool


@dataclass(frozen=True)
class VariationMatrix:
    rows: tuple[VariationDriver, ...]
    columns: tuple[tuple[str, str], ...]  # (definition id, display name)
    cells: dict[tuple[str, str], MatrixCell] = field(default_factory=dict)  # (driver id, definition id)


def subprocesses_in_flow_order(main: ProcessDefinition) -> list[tuple[str, str]]:
    """Callee ids of the main process's call nodes, ordered by position in
    the flow (topological), each callee listed once at first occurrence."""
    preds: dict[str, list[str]] = {n.id: [] for n in main.nodes}
    for f in main.flows:
        preds[f.target].append(f.source)
    sorter = TopologicalSorter({k: sorted(v) for k, v in sorted(preds.items())})
    nodes = main.node_map()
    seen: set[str] = set()
    out: list[tuple[str, str]] = []
    sorter.prepare()
    while sorter.is_active():
        batch = sorted(sorter.get_ready())
        for node_id in batch:
            node = nodes[node_id]
            if node.kind is NodeKind.SUB_PROCESS_CALL and node.callee and node.callee not in seen:
                seen.add(node.callee)
                out.append((node.callee, node.label or node.callee))
            sorter.done(node_id)
    return out


def build_matrix(project: "ProjectFile") -> VariationMatrix:
    """Drivers (strength-ordered) x main's sub-processes (flow-ordered)."""
    driver_ids = {d.id for d in project.drivers}
    repo = project.repository
    for record in project.variants:
        if record.driver not in driver_ids:
            raise DanglingReference(record.driver, f"driver of variant {record.id}")
        if not repo.has(record.subprocess):
            raise DanglingReference(record.subprocess, f"sub-process of variant {record.id}")
    rows = tuple(order_drivers(list(project.drivers)))
    columns = tuple(subprocesses_in_flow_order(repo.root_definition()))
    column_ids = {c[0] for c in columns}
    bands = {g.id: g.band for g in derive_groups(project)}
    cells: dict[tuple[str, str], MatrixCell] = {}
    grouped: dict[tuple[str, str], list[MatrixEntry]] = {}
    for record in project.variants:
        if record.subprocess in column_ids:
            grouped.setdefault((record.driver, record.subprocess), []).append(
                MatrixEntry(record.id, record.subcategory_path)
            )
    for (driver, subprocess), entries in grouped.items():
        band = bands.get(f"{subprocess}:{driver}")
        cells[(driver, subprocess)] = MatrixCell(tuple(entries), band, band is SimilarityBand.IDENTICAL)
    return VariationMatrix(rows, columns, cells)


@dataclass(frozen=True)
class BranchInfo:
    subprocess: str
    group_id: str
    variants: tuple[str, ...]
    label: str
    call_node: str
    split_node: str
    join_node: str


@dataclass(frozen=True)
class VariationMap:
    definition: ProcessDefinition
    branches: tuple[BranchInfo, ...]


def build_variation_map(main: ProcessDefinition, rows: dict[str, DecisionRow]) -> VariationMap:
    """Wrap each sub-process call owning at least one effectively-Separate
    group in an XorSplit/XorJoin pair. Separate groups contribute one branch
    per variant; Together groups on the same call share a single branch.
    Calls whose groups are all Together, and calls without variants, stay
    unwrapped. Analyst choices count as their default."""
    callees = {n.callee for n in main.nodes if n.kind is NodeKind.SUB_PROCESS_CALL and n.callee}
    by_subprocess: dict[str, list[DecisionRow]] = {}
    for row in rows.values():
        if row.group.subprocess not in callees:
            raise DanglingReference(row.group.subprocess, f"group {row.group.id} names no call in {main.id}")
        by_subprocess.setdefault(row.group.subprocess, []).append(row)

    nodes = {n.id: n for n in main.nodes}
    flows = list(main.flows)
    branches: list[BranchInfo] = []
    taken = set(nodes)

    def fresh(base: str) -> str:
        candidate = base
        k = 2
        while candidate in taken:
            candidate = f"{base}{k}"
            k += 1
        taken.add(candidate)
        return candidate

    for call in sorted(main.nodes, key=lambda n: n.id):
        if call.kind is not NodeKind.SUB_PROCESS_CALL or not call.callee:
            continue
        group_rows = by_subprocess.get(call.callee, [])
        if not any(r.verdict.effective() is VerdictKind.SEPARATE for r in group_rows):
            continue
        group_rows = sorted(group_rows, key=lambda r: (-STRENGTH_ORDER[r.strength], r.group.id))
        split_id = fresh(f"{call.id}_split")
        join_id = fresh(f"{call.id}_join")
        nodes[split_id] = ProcessNode(split_id, NodeKind.XOR_SPLIT)
        nodes[join_id] = ProcessNode(join_id, NodeKind.XOR_JOIN)
        call_label = call.label or call.callee
        alternatives: list[tuple[str, tuple[str, ...], str]] = []  # (group id, variants, label)
        for row in group_rows:
            if row.verdict.effective() is VerdictKind.SEPARATE:
                for variant in row.group.variants:
                    alternatives.append((row.group.id, (variant,), variant))
            else:
                alternatives.append((row.group.id, row.group.variants, ",".join(row.group.variants)))
        new_flows = []
        for f in flows:
            if f.target == call.id:
                new_flows.append(SequenceFlow(f.source, split_id, f.variant_tags))
            elif f.source == call.id:
                new_flows.append(SequenceFlow(join_id, f.target, f.variant_tags))
            else:
                new_flows.append(f)
        flows = new_flows
        for index, (group_id, variants, label) in enumerate(alternatives, start=1):
            branch_id = fresh(f"{call.id}_b{index}")
            nodes[branch_id] = ProcessNode(
                branch_id, NodeKind.SUB_PROCESS_CALL, f"{call_label} ({label})", call.callee
            )
            tags = frozenset(variants)
            flows.append(SequenceFlow(split_id, branch_id, tags))
            flows.append(SequenceFlow(branch_id, join_id, tags))
            branches.append(BranchInfo(call.callee, group_id, tuple(variants), label, branch_id, split_id, join_id))
        del nodes[call.id]

    if not branches:
        return VariationMap(main, ())
    definition = ProcessDefinition(main.id, main.name, main.level, tuple(nodes.values()), tuple(flows))
    return VariationMap(definition, tuple(branches))
