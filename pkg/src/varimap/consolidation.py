"""Consolidation of variant models.

merge_variants unifies activity nodes by (kind, normalized label), unions the
flows with variant-id tags, and inserts XOR gateways where variants diverge.
refactor_shared deduplicates graph-isomorphic definitions. baseline_fragment
builds the fragmented counterpart repository: variants are clustered with an
existing model only when they are at least VerySimilar to it, everything else
stays a separate model.

Soundness contract: projecting the merged model onto one variant's flows
reproduces that variant's trace set exactly. This holds for inputs whose
activity nodes have at most one incoming and one outgoing flow per variant;
converging reuse of one node by overlapping variant sets is rejected by the
trace check rather than silently mis-merged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .decisions import DecisionRow, VariationMap, VerdictKind, derive_groups
from .model import (
    ModelError,
    NodeKind,
    ProcessDefinition,
    ProcessNode,
    ProcessRepository,
    SequenceFlow,
    _has_flow_cycle,
    normalize_label,
)
from .similarity import MissingPair, SimilarityBand

_CLUSTER_BANDS = frozenset({SimilarityBand.VERY_SIMILAR, SimilarityBand.IDENTICAL})


class AmbiguousMatch(Exception):
    """A single variant holds two nodes that would unify with each other."""

    def __init__(self, variant_id: str, labels: list[str]):
        self.variant_id = variant_id
        self.labels = labels
        super().__init__(f"variant {variant_id!r} has ambiguous activity labels: {labels}")


@dataclass(frozen=True)
class MergeReport:
    matched_nodes: int
    unmatched_nodes: int
    gateways_inserted: int


@dataclass(frozen=True)
class MergeResult:
    merged: ProcessDefinition
    mapping: dict[tuple[str, str], str]
    report: MergeReport


def _node_key(node: ProcessNode) -> tuple[NodeKind, str]:
    return (node.kind, normalize_label(node.label or ""))


def merge_variants(
    variants: Sequence[tuple[str, ProcessDefinition]],
    merged_id: str | None = None,
) -> MergeResult:
    if len(variants) < 2:
        raise ValueError("merge needs at least two variants")
    for vid, def_ in variants:
        if _has_flow_cycle(def_):
            raise ModelError(f"variant {vid!r} is cyclic; only acyclic models merge")

    all_tags = frozenset(vid for vid, _ in variants)
    if len(all_tags) != len(variants):
        raise ValueError("duplicate variant id in merge input")

    merged_nodes: dict[tuple[NodeKind, str], ProcessNode] = {}
    contributors: dict[tuple[NodeKind, str], set[str]] = {}
    used_ids: set[str] = set()
    mapping: dict[tuple[str, str], str] = {}
    for vid, def_ in variants:
        seen: dict[tuple[NodeKind, str], str] = {}
        for node in def_.nodes:
            key = _node_key(node)
            if key in seen:
                raise AmbiguousMatch(vid, sorted({seen[key], node.label or node.kind.value}))
            seen[key] = node.label or node.kind.value
            if key not in merged_nodes:
                node_id = node.id
                while node_id in used_ids:
                    node_id += "_m"
                # first contributor fixes id, raw label, and callee
                merged_nodes[key] = ProcessNode(node_id, node.kind, node.label, node.callee)
                contributors[key] = set()
                used_ids.add(node_id)
            contributors[key].add(vid)
            mapping[(vid, node.id)] = merged_nodes[key].id

    edge_sources: dict[tuple[str, str], set[str]] = {}
    for vid, def_ in variants:
        for flow in def_.flows:
            pair = (mapping[(vid, flow.source)], mapping[(vid, flow.target)])
            edge_sources.setdefault(pair, set()).add(vid)

    def collapse(tags: frozenset[str]) -> frozenset[str]:
        return frozenset() if tags == all_tags else tags

    edges: dict[tuple[str, str], frozenset[str]] = {
        pair: collapse(frozenset(tags)) for pair, tags in edge_sources.items()
    }

    nodes_by_id: dict[str, ProcessNode] = {n.id: n for n in merged_nodes.values()}
    original_ids = sorted(nodes_by_id)
    gateways = 0

    def fresh(base: str) -> str:
        node_id = base
        while node_id in used_ids:
            node_id += "_m"
        used_ids.add(node_id)
        return node_id

    def tag_union(groups: Mapping[frozenset[str], list]) -> frozenset[str]:
        union: set[str] = set()
        for tags in groups:
            union |= tags
        return collapse(frozenset(union))

    # Split pass: a node whose outgoing flows carry unequal tag sets gets an
    # XorSplit choosing among the variant-specific continuations. Flows taken
    # by every variant stay attached so parallel semantics survive.
    for node_id in original_ids:
        out = {(s, t): tags for (s, t), tags in edges.items() if s == node_id}
        groups: dict[frozenset[str], list[str]] = {}
        for (_, target), tags in out.items():
            groups.setdefault(tags, []).append(target)
        if len(groups) < 2 or nodes_by_id[node_id].kind is NodeKind.XOR_SPLIT:
            continue
        groups.pop(frozenset(), None)
        if len(groups) < 2:
            continue
        split_id = fresh(f"{node_id}_vsplit")
        nodes_by_id[split_id] = ProcessNode(split_id, NodeKind.XOR_SPLIT)
        gateways += 1
        for tags, targets in groups.items():
            for target in targets:
                del edges[(node_id, target)]
        edges[(node_id, split_id)] = tag_union(groups)
        for tags, targets in sorted(groups.items(), key=lambda item: sorted(item[0])):
            if len(targets) == 1:
                edges[(split_id, targets[0])] = tags
            else:
                and_id = fresh(f"{node_id}_vand")
                nodes_by_id[and_id] = ProcessNode(and_id, NodeKind.AND_SPLIT)
                gateways += 1
                edges[(split_id, and_id)] = tags
                for target in sorted(targets):
                    edges[(and_id, target)] = tags

    # Join pass, mirrored: variant-specific inflows converge through an
    # XorJoin. XorJoin and EndEvent nodes already take tokens one at a time.
    for node_id in original_ids:
        kind = nodes_by_id[node_id].kind
        if kind in (NodeKind.XOR_JOIN, NodeKind.END_EVENT):
            continue
        incoming = {(s, t): tags for (s, t), tags in edges.items() if t == node_id}
        groups_in: dict[frozenset[str], list[str]] = {}
        for (source, _), tags in incoming.items():
            groups_in.setdefault(tags, []).append(source)
        if len(groups_in) < 2:
            continue
        groups_in.pop(frozenset(), None)
        if len(groups_in) < 2:
            continue
        join_id = fresh(f"{node_id}_vjoin")
        nodes_by_id[join_id] = ProcessNode(join_id, NodeKind.XOR_JOIN)
        gateways += 1
        for tags, sources in groups_in.items():
            for source in sources:
                del edges[(source, node_id)]
        edges[(join_id, node_id)] = tag_union(groups_in)
        for tags, sources in sorted(groups_in.items(), key=lambda item: sorted(item[0])):
            if len(sources) == 1:
                edges[(sources[0], join_id)] = tags
            else:
                and_id = fresh(f"{node_id}_vandj")
                nodes_by_id[and_id] = ProcessNode(and_id, NodeKind.AND_JOIN)
                gateways += 1
                edges[(and_id, join_id)] = tags
                for source in sorted(sources):
                    edges[(source, and_id)] = tags

    first_def = variants[0][1]
    def_id = merged_id if merged_id is not None else "merged__" + "__".join(vid for vid, _ in variants)
    merged = ProcessDefinition(
        def_id,
        first_def.name,
        first_def.level,
        tuple(nodes_by_id.values()),
        tuple(SequenceFlow(s, t, tags) for (s, t), tags in edges.items()),
    )
    if _has_flow_cycle(merged):
        raise ModelError("merged model is cyclic; variants disagree on activity order")
    matched = sum(1 for key, vids in contributors.items() if len(vids) > 1)
    report = MergeReport(matched, len(merged_nodes) - matched, gateways)
    return MergeResult(merged, mapping, report)


def project_variant(merged: ProcessDefinition, variant_id: str) -> ProcessDefinition:
    """Restrict a merged model to one variant: keep flows tagged with the
    variant or untagged, drop nodes left without any flow."""
    flows = tuple(
        SequenceFlow(f.source, f.target)
        for f in merged.flows
        if not f.variant_tags or variant_id in f.variant_tags
    )
    incident = {f.source for f in flows} | {f.target for f in flows}
    nodes = tuple(n for n in merged.nodes if n.id in incident)
    if not nodes:
        nodes = merged.nodes
    return ProcessDefinition(f"{merged.id}__only_{variant_id}", merged.name, merged.level, nodes, flows)


def _signature(def_: ProcessDefinition) -> dict[str, tuple]:
    in_deg: dict[str, int] = {n.id: 0 for n in def_.nodes}
    out_deg: dict[str, int] = {n.id: 0 for n in def_.nodes}
    for f in def_.flows:
        out_deg[f.source] += 1
        in_deg[f.target] += 1
    return {
        n.id: (n.kind, normalize_label(n.label or ""), n.callee, in_deg[n.id], out_deg[n.id])
        for n in def_.nodes
    }


def is_isomorphic(a: ProcessDefinition, b: ProcessDefinition) -> bool:
    """Graph isomorphism preserving kind, normalized label, callee, and
    tagged flows. Exhaustive with signature pruning; fine for model-sized
    graphs."""
    if len(a.nodes) != len(b.nodes) or len(a.flows) != len(b.flows):
        return False
    sig_a, sig_b = _signature(a), _signature(b)
    if sorted(sig_a.values()) != sorted(sig_b.values()):
        return False
    edges_a = {(f.source, f.target): f.variant_tags for f in a.flows}
    edges_b = {(f.source, f.target): f.variant_tags for f in b.flows}
    candidates: dict[str, list[str]] = {
        na: [nb for nb in sig_b if sig_b[nb] == sig_a[na]] for na in sig_a
    }
    order = sorted(sig_a, key=lambda n: (len(candidates[n]), n))
    assigned: dict[str, str] = {}
    used: set[str] = set()

    def consistent(na: str, nb: str) -> bool:
        for (s, t), tags in edges_a.items():
            if s == na and t in assigned:
                if edges_b.get((nb, assigned[t])) != tags:
                    return False
            if t == na and s in assigned:
                if edges_b.get((assigned[s], nb)) != tags:
                    return False
        return True

    def backtrack(i: int) -> bool:
        if i == len(order):
            return True
        na = order[i]
        for nb in candidates[na]:
            if nb in used or not consistent(na, nb):
                continue
            assigned[na] = nb
            used.add(nb)
            if backtrack(i + 1):
                return True
            del assigned[na]
            used.remove(nb)
        return False

    return backtrack(0)


def refactor_shared(repo: ProcessRepository) -> ProcessRepository:
    """Deduplicate graph-isomorphic definitions, deepest level first so that
    callers compare against already-canonical callees. Survivor is the root
    when present, otherwise the smallest id. Call sites are re-pointed."""
    current: dict[str, ProcessDefinition] = {d.id: d for d in repo.definitions}
    for level in sorted({d.level for d in current.values()}, reverse=True):
        group = sorted((d for d in current.values() if d.level == level), key=lambda d: d.id)
        classes: list[list[ProcessDefinition]] = []
        for def_ in group:
            for cls in classes:
                if is_isomorphic(cls[0], def_):
                    cls.append(def_)
                    break
            else:
                classes.append([def_])
        replacement: dict[str, str] = {}
        for cls in classes:
            if len(cls) == 1:
                continue
            ids = [d.id for d in cls]
            survivor = repo.root if repo.root in ids else min(ids)
            for d in cls:
                if d.id != survivor:
                    replacement[d.id] = survivor
                    del current[d.id]
        if not replacement:
            continue
        for def_id, def_ in list(current.items()):
            if not any(n.callee in replacement for n in def_.nodes):
                continue
            nodes = tuple(
                ProcessNode(n.id, n.kind, n.label, replacement.get(n.callee, n.callee))
                for n in def_.nodes
            )
            current[def_id] = ProcessDefinition(def_.id, def_.name, def_.level, nodes, def_.flows)
    return ProcessRepository(tuple(current.values()), repo.root)


def baseline_fragment(
    variants: Sequence[tuple[str, ProcessDefinition]],
    sim: Mapping[frozenset[str], SimilarityBand],
) -> ProcessRepository:
    """Fragmented modelling: walk variants in the given order (most common
    first); a variant joins a cluster only when its band to the cluster's
    first member is VerySimilar or Identical, otherwise it becomes a new
    model. One model per cluster, shared definitions refactored once."""
    if not variants:
        raise ValueError("baseline needs at least one variant")
    for vid, def_ in variants:
        if def_.level != 2:
            raise ValueError(f"baseline variants must be complete top-level models; {vid!r} is level {def_.level}")
    clusters: list[list[tuple[str, ProcessDefinition]]] = []
    for vid, def_ in variants:
        for cluster in clusters:
            rep = cluster[0][0]
            band = sim.get(frozenset({rep, vid}))
            if band is None:
                raise MissingPair(rep, vid)
            if band in _CLUSTER_BANDS:
                cluster.append((vid, def_))
                break
        else:
            clusters.append([(vid, def_)])
    definitions: list[ProcessDefinition] = []
    for cluster in clusters:
        if len(cluster) == 1:
            definitions.append(cluster[0][1])
        else:
            definitions.append(merge_variants(cluster).merged)
    repo = ProcessRepository(tuple(definitions), definitions[0].id)
    return refactor_shared(repo)


def _reachable_definitions(repo: ProcessRepository) -> set[str]:
    seen = {repo.root}
    frontier = [repo.root]
    while frontier:
        def_ = repo.get(frontier.pop())
        for node in def_.nodes:
            if node.callee and repo.has(node.callee) and node.callee not in seen:
                seen.add(node.callee)
                frontier.append(node.callee)
    return seen


def _merge_group_models(
    project,
    variant_ids: Sequence[str],
    merged_id: str,
) -> ProcessDefinition | None:
    """Merged model of a Together group, or None when any member lacks one."""
    by_id = {v.id: v for v in project.variants}
    pairs = []
    for vid in variant_ids:
        model_id = by_id[vid].model
        if model_id is None:
            return None
        pairs.append((vid, project.repository.get(model_id)))
    if len(pairs) == 1:
        return pairs[0][1]
    return merge_variants(pairs, merged_id=merged_id).merged


def _safe_id(text: str) -> str:
    return "".join(ch if ch.isalnum() or ch == "_" else "_" for ch in text)


def project_consolidate(project) -> tuple[ProcessRepository, VariationMap]:
    """Consolidated repository for a project: the root becomes its variation
    map, Separate branches call variant models, Together groups collapse to
    one merged model, shared definitions are refactored once."""
    from .decisions import build_variation_map

    rows = decide_rows_for_map(project)
    main = project.repository.root_definition()
    vmap = build_variation_map(main, rows)
    by_variant = {v.id: v for v in project.variants}
    current = {d.id: d for d in project.repository.definitions}
    map_def = vmap.definition
    new_nodes = {n.id: n for n in map_def.nodes}

    for branch in vmap.branches:
        call = new_nodes[branch.call_node]
        if len(branch.variants) == 1:
            model_id = by_variant[branch.variants[0]].model
            if model_id is not None:
                new_nodes[call.id] = ProcessNode(call.id, call.kind, call.label, model_id)
        else:
            merged = _merge_group_models(
                project, branch.variants, f"{branch.subprocess}__{_safe_id(branch.group_id)}"
            )
            if merged is not None:
                current[merged.id] = merged
                new_nodes[call.id] = ProcessNode(call.id, call.kind, call.label, merged.id)

    # Together verdicts on calls the map left unwrapped still consolidate:
    # the call re-points to the merged model when every member has one.
    wrapped = {b.subprocess for b in vmap.branches}
    groups_by_sub: dict[str, list] = {}
    for row in rows.values():
        groups_by_sub.setdefault(row.group.subprocess, []).append(row)
    for subprocess, sub_rows in groups_by_sub.items():
        if subprocess in wrapped or len(sub_rows) != 1:
            continue
        row = sub_rows[0]
        if row.verdict.effective() is not VerdictKind.TOGETHER:
            continue
        merged = _merge_group_models(
            project, row.group.variants, f"{subprocess}__{_safe_id(row.group.id)}"
        )
        if merged is None:
            continue
        current[merged.id] = merged
        for node_id, node in list(new_nodes.items()):
            if node.kind is NodeKind.SUB_PROCESS_CALL and node.callee == subprocess:
                new_nodes[node_id] = ProcessNode(node.id, node.kind, node.label, merged.id)

    current[map_def.id] = ProcessDefinition(
        map_def.id, map_def.name, map_def.level, tuple(new_nodes.values()), map_def.flows
    )
    repo = ProcessRepository(tuple(current.values()), project.repository.root)
    reachable = _reachable_definitions(repo)
    repo = ProcessRepository(
        tuple(d for d in repo.definitions if d.id in reachable), repo.root
    )
    repo = refactor_shared(repo)
    return repo, vmap


def decide_rows_for_map(project) -> dict[str, DecisionRow]:
    """Decision rows restricted to groups on the root's own sub-process
    calls; deeper groups are decided but cannot shape the root's map."""
    from .decisions import decide_project

    rows = decide_project(project)
    main = project.repository.root_definition()
    callees = {n.callee for n in main.nodes if n.kind is NodeKind.SUB_PROCESS_CALL and n.callee}
    return {gid: row for gid, row in rows.items() if row.group.subprocess in callees}


def project_baseline(project) -> ProcessRepository:
    """Fragmented counterpart of a project: per sub-process, modelled
    variants cluster only when assessed VerySimilar or Identical to the
    cluster's first member; the root keeps calling the first fragment and the
    other fragments stay as separate, uncalled models."""
    groups = derive_groups(project)
    band_by_pair: dict[frozenset[str], SimilarityBand] = {}
    for group in groups:
        if group.band is None:
            continue
        members = sorted(group.variants)
        for i, a in enumerate(members):
            for b in members[i + 1 :]:
                band_by_pair[frozenset({a, b})] = group.band

    by_sub: dict[str, list] = {}
    for record in project.variants:
        if record.model is not None:
            by_sub.setdefault(record.subprocess, []).append(record)

    current = {d.id: d for d in project.repository.definitions}
    main = project.repository.root_definition()
    retarget: dict[str, str] = {}
    extra_fragments: list[str] = []
    for subprocess, records in by_sub.items():
        clusters: list[list] = []
        for record in records:
            for cluster in clusters:
                band = band_by_pair.get(
                    frozenset({cluster[0].id, record.id}), SimilarityBand.NOT_SIMILAR
                )
                if band in _CLUSTER_BANDS:
                    cluster.append(record)
                    break
            else:
                clusters.append([record])
        fragment_ids = []
        for cluster in clusters:
            if len(cluster) == 1:
                fragment_ids.append(cluster[0].model)
            else:
                merged = merge_variants(
                    [(r.id, project.repository.get(r.model)) for r in cluster],
                    merged_id=f"{subprocess}__cluster_{_safe_id(cluster[0].id)}",
                )
                current[merged.merged.id] = merged.merged
                fragment_ids.append(merged.merged.id)
        retarget[subprocess] = fragment_ids[0]
        extra_fragments.extend(fragment_ids[1:])

    nodes = tuple(
        ProcessNode(n.id, n.kind, n.label, retarget.get(n.callee, n.callee)) for n in main.nodes
    )
    current[main.id] = ProcessDefinition(main.id, main.name, main.level, nodes, main.flows)
    repo = ProcessRepository(tuple(current.values()), project.repository.root)
    keep = _reachable_definitions(repo) | set(extra_fragments)
    changed = True
    while changed:
        changed = False
        for def_id in list(keep):
            for node in repo.get(def_id).nodes:
                if node.callee and repo.has(node.callee) and node.callee not in keep:
                    keep.add(node.callee)
                    changed = True
    repo = ProcessRepository(tuple(d for d in repo.definitions if d.id in keep), repo.root)
    return refactor_shared(repo)
