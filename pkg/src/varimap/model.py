"""Core process-model types and structural operations.

A repository holds a family of hierarchical process definitions: one root
main process at decomposition level 2 whose sub-process calls descend to
levels 3..5. Definitions are plain frozen dataclasses; structural problems
are reported as Violation values rather than exceptions so callers can
collect and display all of them at once.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from graphlib import TopologicalSorter


class NodeKind(str, Enum):
    TASK = "task"
    SUB_PROCESS_CALL = "sub_process_call"
    XOR_SPLIT = "xor_split"
    XOR_JOIN = "xor_join"
    AND_SPLIT = "and_split"
    AND_JOIN = "and_join"
    START_EVENT = "start_event"
    END_EVENT = "end_event"


# Kinds that count as activities for labelling and duplicate detection.
ACTIVITY_KINDS = frozenset({NodeKind.TASK, NodeKind.SUB_PROCESS_CALL})

_WS = re.compile(r"\s+")


def normalize_label(label: str) -> str:
    """Casefold, trim, and collapse internal whitespace. Idempotent."""
    return _WS.sub(" ", label.strip()).casefold()


@dataclass(frozen=True)
class ProcessNode:
    id: str
    kind: NodeKind
    label: str | None = None
    callee: str | None = None  # definition id, only for SUB_PROCESS_CALL


@dataclass(frozen=True)
class SequenceFlow:
    source: str
    target: str
    # Variant ids this flow belongs to; empty set = all variants.
    variant_tags: frozenset[str] = frozenset()

    def __post_init__(self):
        if not isinstance(self.variant_tags, frozenset):
            object.__setattr__(self, "variant_tags", frozenset(self.variant_tags))


@dataclass(frozen=True)
class ProcessDefinition:
    """Nodes and flows carry set semantics: declaration order is normalized
    away at construction so equality and printing ignore input ordering."""

    id: str
    name: str
    level: int
    nodes: tuple[ProcessNode, ...]
    flows: tuple[SequenceFlow, ...]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(sorted(self.nodes, key=lambda n: n.id)))
        object.__setattr__(
            self,
            "flows",
            tuple(sorted(self.flows, key=lambda f: (f.source, f.target, sorted(f.variant_tags)))),
        )

    def node_map(self) -> dict[str, ProcessNode]:
        return {n.id: n for n in self.nodes}

    def outgoing(self, node_id: str) -> list[SequenceFlow]:
        return [f for f in self.flows if f.source == node_id]

    def incoming(self, node_id: str) -> list[SequenceFlow]:
        return [f for f in self.flows if f.target == node_id]


@dataclass(frozen=True)
class ProcessRepository:
    definitions: tuple[ProcessDefinition, ...]
    root: str

    def __post_init__(self):
        object.__setattr__(self, "definitions", tuple(sorted(self.definitions, key=lambda d: d.id)))

    def get(self, def_id: str) -> ProcessDefinition:
        for d in self.definitions:
            if d.id == def_id:
                return d
        raise KeyError(def_id)

    def has(self, def_id: str) -> bool:
        return any(d.id == def_id for d in self.definitions)

    def root_definition(self) -> ProcessDefinition:
        return self.get(self.root)

    def with_definition(self, definition: ProcessDefinition) -> "ProcessRepository":
        """Return a copy where `definition` replaces any same-id entry."""
        out = [d for d in self.definitions if d.id != definition.id]
        out.append(definition)
        return replace(self, definitions=tuple(out))


@dataclass(frozen=True)
class Violation:
    code: str
    definition_id: str | None
    subject: str | None
    message: str


class ModelError(Exception):
    """Base class for model-level failures."""


class DeadlockError(ModelError):
    def __init__(self, definition_id: str, marking: dict[str, int]):
        self.definition_id = definition_id
        self.marking = dict(marking)
        stuck = ", ".join(sorted(k for k, v in marking.items() if v))
        super().__init__(f"deadlock in {definition_id}: tokens stuck at {stuck}")


class BoundExceeded(ModelError):
    def __init__(self, definition_id: str, bound: int):
        self.definition_id = definition_id
        self.bound = bound
        super().__init__(f"{definition_id} has more than {bound} complete runs")


def _reachable(def_: ProcessDefinition, seeds: list[str], forward: bool) -> set[str]:
    adj: dict[str, list[str]] = {}
    for f in def_.flows:
        a, b = (f.source, f.target) if forward else (f.target, f.source)
        adj.setdefault(a, []).append(b)
    seen = set(seeds)
    stack = list(seeds)
    while stack:
        for nxt in adj.get(stack.pop(), []):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def _definition_violations(def_: ProcessDefinition) -> list[Violation]:
    out: list[Violation] = []
    ids = [n.id for n in def_.nodes]
    id_set = set(ids)
    if len(ids) != len(id_set):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        for d in dupes:
            out.append(Violation("DuplicateNodeId", def_.id, d, f"node id {d!r} declared more than once"))

    starts = [n for n in def_.nodes if n.kind is NodeKind.START_EVENT]
    ends = [n for n in def_.nodes if n.kind is NodeKind.END_EVENT]
    if not starts:
        out.append(Violation("NoStart", def_.id, None, "definition has no start event"))
    if not ends:
        out.append(Violation("NoEnd", def_.id, None, "definition has no end event"))

    for n in def_.nodes:
        if n.kind in ACTIVITY_KINDS and not (n.label and n.label.strip()):
            out.append(Violation("MissingLabel", def_.id, n.id, f"{n.kind.value} {n.id!r} has no label"))
        if n.kind is NodeKind.SUB_PROCESS_CALL and not n.callee:
            out.append(Violation("MissingCallee", def_.id, n.id, f"sub-process call {n.id!r} names no callee"))
        if n.kind is not NodeKind.SUB_PROCESS_CALL and n.callee:
            out.append(Violation("CalleeOnNonCall", def_.id, n.id, f"{n.kind.value} {n.id!r} must not name a callee"))

    seen_pairs: set[tuple[str, str]] = set()
    for f in def_.flows:
        for endpoint in (f.source, f.target):
            if endpoint not in id_set:
                out.append(Violation("DanglingFlowEndpoint", def_.id, endpoint,
                                     f"flow {f.source}->{f.target} references unknown node {endpoint!r}"))
        if f.source == f.target:
            out.append(Violation("SelfLoopFlow", def_.id, f.source, f"flow {f.source}->{f.target} is a self loop"))
        pair = (f.source, f.target)
        if pair in seen_pairs:
            out.append(Violation("DuplicateFlow", def_.id, f"{f.source}->{f.target}",
                                 f"more than one flow from {f.source} to {f.target}"))
        seen_pairs.add(pair)

    if _has_flow_cycle(def_):
        out.append(Violation("FlowCycle", def_.id, None, "flow graph contains a cycle"))

    if starts and ends and not any(v.code == "DanglingFlowEndpoint" for v in out):
        fwd = _reachable(def_, [s.id for s in starts], forward=True)
        bwd = _reachable(def_, [e.id for e in ends], forward=False)
        for n in def_.nodes:
            if n.id not in fwd:
                out.append(Violation("Unreachable", def_.id, n.id, f"node {n.id!r} is unreachable from every start"))
            elif n.id not in bwd:
                out.append(Violation("CannotReachEnd", def_.id, n.id, f"node {n.id!r} cannot reach any end"))
    return out


def validate_repository(repo: ProcessRepository) -> list[Violation]:
    """Structural checks; returns every violation found, empty list when sound."""
    out: list[Violation] = []
    def_ids = [d.id for d in repo.definitions]
    for dup in sorted({i for i in def_ids if def_ids.count(i) > 1}):
        out.append(Violation("DuplicateDefinitionId", dup, None, f"definition id {dup!r} declared more than once"))

    by_id = {d.id: d for d in repo.definitions}
    if repo.root not in by_id:
        out.append(Violation("RootMissing", None, repo.root, f"root {repo.root!r} is not a definition"))
    elif by_id[repo.root].level != 2:
        out.append(Violation("RootLevel", repo.root, None,
                             f"root must sit at level 2, found {by_id[repo.root].level}"))

    calls: dict[str, set[str]] = {d.id: set() for d in repo.definitions}
    for d in repo.definitions:
        if d.level < 2:
            out.append(Violation("BadLevel", d.id, None, f"level must be >= 2, found {d.level}"))
        out.extend(_definition_violations(d))
        for n in d.nodes:
            if n.kind is NodeKind.SUB_PROCESS_CALL and n.callee:
                if n.callee not in by_id:
                    out.append(Violation("DanglingCallee", d.id, n.id, f"call {n.id!r} targets unknown definition {n.callee!r}"))
                else:
                    calls[d.id].add(n.callee)
                    callee = by_id[n.callee]
                    if callee.level != d.level + 1:
                        out.append(Violation("BadCalleeLevel", d.id, n.id,
                                             f"call {n.id!r} targets level {callee.level}, expected {d.level + 1}"))

    try:
        TopologicalSorter(calls).prepare()
    except Exception:
        out.append(Violation("CallCycle", None, None, "sub-process call graph contains a cycle"))
    return out


def decomposition_level(repo: ProcessRepository, def_id: str) -> int:
    """Stored level of a definition, checked against 2 + call depth from root.

    Raises ModelError when the stored level disagrees with the call structure
    or the definition is not reachable from the root through calls.
    """
    depth: dict[str, int] = {repo.root: 2}
    frontier = [repo.root]
    while frontier:
        current = frontier.pop()
        d = repo.get(current)
        for n in d.nodes:
            if n.kind is NodeKind.SUB_PROCESS_CALL and n.callee and repo.has(n.callee):
                want = depth[current] + 1
                if n.callee not in depth:
                    depth[n.callee] = want
                    frontier.append(n.callee)
    if def_id not in depth:
        raise ModelError(f"{def_id!r} is not reachable from root {repo.root!r} via calls")
    stored = repo.get(def_id).level
    if stored != depth[def_id]:
        raise ModelError(f"{def_id!r} stores level {stored} but sits at call depth level {depth[def_id]}")
    return stored


def activity_nodes(repo: ProcessRepository) -> list[tuple[str, str, str]]:
    """All task and sub-process-call nodes, as (definition id, node id,
    normalized label) triples. Each definition is counted once even if
    called from several places.
    """
    out: list[tuple[str, str, str]] = []
    for d in repo.definitions:
        for n in d.nodes:
            if n.kind in ACTIVITY_KINDS:
                out.append((d.id, n.id, normalize_label(n.label or "")))
    return out


def _has_flow_cycle(def_: ProcessDefinition) -> bool:
    graph = {n.id: set() for n in def_.nodes}
    for f in def_.flows:
        graph.setdefault(f.target, set()).add(f.source)
    try:
        TopologicalSorter(graph).prepare()
        return False
    except Exception:
        return True


def enumerate_traces(def_: ProcessDefinition, bound: int = 1000) -> list[tuple[str, ...]]:
    """All complete runs of an acyclic definition as tuples of activity labels.

    Token game: start events seed one token on each outgoing flow; tasks and
    calls consume a token from every incoming flow and produce one on every
    outgoing flow; an xor split consumes one token from one incoming flow and
    produces on exactly one chosen outgoing flow; an xor join forwards a
    single token; and gateways synchronize all-in/all-out; an end event
    swallows one token. A run is complete when no tokens remain. Stuck
    non-empty markings raise DeadlockError; more than `bound` complete runs
    raises BoundExceeded.
    """
    if bound < 1:
        raise ValueError("bound must be >= 1")
    if _has_flow_cycle(def_):
        raise ModelError(f"{def_.id!r} has a flow cycle; traces are enumerable for acyclic definitions only")

    nodes = def_.node_map()
    incoming: dict[str, list[tuple[str, str]]] = {n: [] for n in nodes}
    outgoing: dict[str, list[tuple[str, str]]] = {n: [] for n in nodes}
    for f in def_.flows:
        edge = (f.source, f.target)
        outgoing[f.source].append(edge)
        incoming[f.target].append(edge)

    initial: dict[tuple[str, str], int] = {}
    for n in def_.nodes:
        if n.kind is NodeKind.START_EVENT:
            for e in outgoing[n.id]:
                initial[e] = initial.get(e, 0) + 1

    results: list[tuple[str, ...]] = []

    def fire_options(marking: dict[tuple[str, str], int]):
        """Yield (consumed, produced, label) alternatives over all enabled nodes."""
        for node_id, node in nodes.items():
            ins = incoming[node_id]
            outs = outgoing[node_id]
            label = node.label if node.kind in ACTIVITY_KINDS else None
            if node.kind is NodeKind.START_EVENT:
                continue
            if node.kind is NodeKind.XOR_SPLIT:
                if any(marking.get(e, 0) for e in ins):
                    src = next(e for e in ins if marking.get(e, 0))
                    for choice in outs:
                        yield [src], [choice], label
            elif node.kind is NodeKind.XOR_JOIN:
                for e in ins:
                    if marking.get(e, 0):
                        yield [e], list(outs), label
                        break  # one option per stuck token is enough; order does not matter
            elif node.kind is NodeKind.END_EVENT:
                for e in ins:
                    if marking.get(e, 0):
                        yield [e], [], label
                        break
            else:  # task, call, and-split, and-join: all-in / all-out
                if ins and all(marking.get(e, 0) for e in ins):
                    yield list(ins), list(outs), label

    def step(marking: dict[tuple[str, str], int], trace: list[str]):
        options = list(fire_options(marking))
        if not options:
            if any(marking.values()):
                raise DeadlockError(def_.id, {f"{a}->{b}": c for (a, b), c in marking.items() if c})
            if len(results) >= bound:
                raise BoundExceeded(def_.id, bound)
            results.append(tuple(trace))
            return
        seen_states = set()
        for consumed, produced, label in options:
            nxt = dict(marking)
            for e in consumed:
                nxt[e] -= 1
                if not nxt[e]:
                    del nxt[e]
            for e in produced:
                nxt[e] = nxt.get(e, 0) + 1
            key = (tuple(sorted(nxt.items())), label)
            if key in seen_states:
                continue  # interleavings that converge immediately
            seen_states.add(key)
            step(nxt, trace + [label] if label else trace)

    step(dict(initial), [])
    # Distinct activity sequences; concurrent interleavings can repeat them.
    unique = sorted(set(results))
    return unique


def definition_size(def_: ProcessDefinition) -> int:
    """Node count + flow count; the size measure used by similarity scoring."""
    return len(def_.nodes) + len(def_.flows)
