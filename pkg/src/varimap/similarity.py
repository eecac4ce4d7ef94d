"""Similarity bands, a greedy graph-edit-distance similarity estimator, and
a small-instance exact oracle used to bound it from above.

All edits cost one unit: node insert, node delete, node relabel, edge
insert, edge delete. Nodes match only within the same kind; gateways and
events take part like any other node. Similarity normalizes the edit
distance by size(g1)+size(g2) where size = nodes + flows, so scores land
in [0, 1]. The greedy estimator computes an upper bound on the distance,
which makes its similarity a lower bound on the exact one.
"""

from __future__ import annotations

from dataclasses import dataclass
from difflib import SequenceMatcher
from enum import Enum
from itertools import combinations

from .model import NodeKind, ProcessDefinition, definition_size, normalize_label


class SimilarityBand(str, Enum):
    IDENTICAL = "identical"
    VERY_SIMILAR = "very_similar"
    SIMILAR = "similar"
    SOMEWHAT_SIMILAR = "somewhat_similar"
    NOT_SIMILAR = "not_similar"


# Strict total order, most similar first.
BAND_ORDER: dict[SimilarityBand, int] = {
    SimilarityBand.IDENTICAL: 4,
    SimilarityBand.VERY_SIMILAR: 3,
    SimilarityBand.SIMILAR: 2,
    SimilarityBand.SOMEWHAT_SIMILAR: 1,
    SimilarityBand.NOT_SIMILAR: 0,
}


class SizeGuardExceeded(Exception):
    def __init__(self, node_count: int, limit: int):
        self.node_count = node_count
        self.limit = limit
        super().__init__(f"exact edit distance guarded to <= {limit} nodes per graph, got {node_count}")


class MissingPair(Exception):
    def __init__(self, a: str, b: str):
        self.pair = (a, b)
        super().__init__(f"no similarity recorded for pair ({a}, {b})")


@dataclass(frozen=True)
class SimilarityAssessment:
    group: frozenset[str]
    band: SimilarityBand
    source: str = "manual"  # manual | computed
    score: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "group", frozenset(self.group))
        if len(self.group) < 2:
            raise ValueError("an assessment covers at least two variants")
        if self.source not in ("manual", "computed"):
            raise ValueError(f"unknown assessment source {self.source!r}")
        if self.source == "computed":
            if self.score is None:
                raise ValueError("computed assessments carry their score")
            if band_from_score(self.score) is not self.band:
                raise ValueError(f"score {self.score} maps to {band_from_score(self.score).value}, not {self.band.value}")


def band_from_score(score: float) -> SimilarityBand:
    """Thresholds: 1 exactly is identical, above 0.75 very similar, 0.5-0.75
    similar, 0.25 to below 0.5 somewhat similar, below 0.25 not similar."""
    if not 0.0 <= score <= 1.0:
        raise ValueError(f"similarity score must be within [0, 1], got {score}")
    if score == 1.0:
        return SimilarityBand.IDENTICAL
    if score > 0.75:
        return SimilarityBand.VERY_SIMILAR
    if score >= 0.5:
        return SimilarityBand.SIMILAR
    if score >= 0.25:
        return SimilarityBand.SOMEWHAT_SIMILAR
    return SimilarityBand.NOT_SIMILAR


def _node_key(node) -> tuple[NodeKind, str]:
    return (node.kind, normalize_label(node.label or ""))


def _edge_set(def_: ProcessDefinition) -> set[tuple[str, str]]:
    return {(f.source, f.target) for f in def_.flows}


def _mapping_cost(g1: ProcessDefinition, g2: ProcessDefinition, mapping: dict[str, str]) -> int:
    """Unit-cost edit script implied by an injective partial node mapping."""
    labels1 = {n.id: _node_key(n)[1] for n in g1.nodes}
    labels2 = {n.id: _node_key(n)[1] for n in g2.nodes}
    cost = 0
    for a, b in mapping.items():
        if labels1[a] != labels2[b]:
            cost += 1  # relabel
    cost += len(g1.nodes) - len(mapping)  # deletions
    cost += len(g2.nodes) - len(mapping)  # insertions
    edges1, edges2 = _edge_set(g1), _edge_set(g2)
    preserved = set()
    for u, v in edges1:
        mu, mv = mapping.get(u), mapping.get(v)
        if mu is not None and mv is not None and (mu, mv) in edges2:
            preserved.add((mu, mv))
        else:
            cost += 1  # edge deletion
    cost += len(edges2) - len(preserved)  # edge insertions
    return cost


def _label_ratio(a: str, b: str) -> float:
    return SequenceMatcher(None, a, b).ratio()


def _greedy_mapping(g1: ProcessDefinition, g2: ProcessDefinition) -> dict[str, str]:
    mapping: dict[str, str] = {}
    used2: set[str] = set()
    by_key1: dict[tuple[NodeKind, str], list[str]] = {}
    by_key2: dict[tuple[NodeKind, str], list[str]] = {}
    for n in g1.nodes:
        by_key1.setdefault(_node_key(n), []).append(n.id)
    for n in g2.nodes:
        by_key2.setdefault(_node_key(n), []).append(n.id)
    # Exact (kind, label) matches first; node lists are id-sorted already,
    # so comparing a definition against itself maps every node to itself.
    for key, ids1 in sorted(by_key1.items()):
        ids2 = by_key2.get(key, [])
        for a, b in zip(ids1, ids2):
            mapping[a] = b
            used2.add(b)
    # Then same-kind pairs by best label similarity.
    rest1 = [n for n in g1.nodes if n.id not in mapping]
    rest2 = [n for n in g2.nodes if n.id not in used2]
    candidates = []
    for n1 in rest1:
        for n2 in rest2:
            if n1.kind is n2.kind:
                ratio = _label_ratio(normalize_label(n1.label or ""), normalize_label(n2.label or ""))
                candidates.append((-ratio, n1.id, n2.id))
    for _, a, b in sorted(candidates):
        if a not in mapping and b not in used2:
            mapping[a] = b
            used2.add(b)
    return mapping


def _canonical_order(g1: ProcessDefinition, g2: ProcessDefinition) -> tuple[ProcessDefinition, ProcessDefinition]:
    def key(d: ProcessDefinition) -> tuple:
        return (
            d.id,
            d.level,
            tuple((n.id, n.kind.value, n.label or "") for n in d.nodes),
            tuple((f.source, f.target) for f in d.flows),
        )

    return (g1, g2) if key(g1) <= key(g2) else (g2, g1)


def greedy_ged(g1: ProcessDefinition, g2: ProcessDefinition) -> int:
    """Upper bound on the unit-cost edit distance."""
    g1, g2 = _canonical_order(g1, g2)
    return _mapping_cost(g1, g2, _greedy_mapping(g1, g2))


def graph_similarity(g1: ProcessDefinition, g2: ProcessDefinition) -> float:
    """1 - greedy_ged/(size1+size2), clamped to [0, 1]. Symmetric; 1.0 on
    equal definitions. Two empty definitions count as identical."""
    denom = definition_size(g1) + definition_size(g2)
    if denom == 0:
        return 1.0
    return max(0.0, min(1.0, 1.0 - greedy_ged(g1, g2) / denom))


EXACT_NODE_LIMIT = 8


def exact_ged(g1: ProcessDefinition, g2: ProcessDefinition, limit: int = EXACT_NODE_LIMIT) -> int:
    """Minimal unit-cost edit distance by exhaustive search over injective
    partial same-kind node mappings. Guarded to small graphs."""
    for g in (g1, g2):
        if len(g.nodes) > limit:
            raise SizeGuardExceeded(len(g.nodes), limit)
    g1, g2 = _canonical_order(g1, g2)
    nodes1 = [n.id for n in g1.nodes]
    kind1 = {n.id: n.kind for n in g1.nodes}
    kind2 = {n.id: n.kind for n in g2.nodes}
    nodes2 = [n.id for n in g2.nodes]
    best = _mapping_cost(g1, g2, {})  # delete everything, insert everything

    def walk(index: int, mapping: dict[str, str], used: set[str]) -> None:
        nonlocal best
        if index == len(nodes1):
            cost = _mapping_cost(g1, g2, mapping)
            if cost < best:
                best = cost
            return
        a = nodes1[index]
        for b in nodes2:
            if b not in used and kind2[b] is kind1[a]:
                mapping[a] = b
                used.add(b)
                walk(index + 1, mapping, used)
                del mapping[a]
                used.discard(b)
        walk(index + 1, mapping, used)  # leave a unmatched (delete it)

    walk(0, {}, set())
    return best


def group_band(group: list[str], pairs: dict[frozenset[str], SimilarityBand | float]) -> SimilarityBand:
    """Weakest-link aggregation: the minimum band over every pair in the
    group. Scores are converted through band_from_score. Raises MissingPair
    when any pair is uncovered."""
    if len(group) < 2:
        raise ValueError("a group holds at least two variants")
    worst = SimilarityBand.IDENTICAL
    for a, b in combinations(sorted(set(group)), 2):
        value = pairs.get(frozenset((a, b)))
        if value is None:
            raise MissingPair(a, b)
        band = value if isinstance(value, SimilarityBand) else band_from_score(value)
        if BAND_ORDER[band] < BAND_ORDER[worst]:
            worst = band
    return worst
