"""Core graph model: set semantics, structural validation, trace enumeration."""

import pytest

from varimap.model import (
    BoundExceeded,
    DeadlockError,
    ModelError,
    NodeKind,
    ProcessDefinition,
    ProcessNode,
    ProcessRepository,
    SequenceFlow,
    activity_nodes,
    decomposition_level,
    definition_size,
    enumerate_traces,
    normalize_label,
    validate_repository,
)

from conftest import chain_def


def _def(def_id, nodes, flows, level=2, name=None):
    return ProcessDefinition(def_id, name or def_id, level, tuple(nodes), tuple(flows))


def test_normalize_label_collapses_whitespace_and_case():
    assert normalize_label("  Check   Credit ") == "check credit"
    assert normalize_label("CHECK CREDIT") == normalize_label("check\tcredit")


def test_definition_equality_ignores_declaration_order():
    nodes = [
        ProcessNode("s", NodeKind.START_EVENT),
        ProcessNode("a", NodeKind.TASK, "A"),
        ProcessNode("e", NodeKind.END_EVENT),
    ]
    flows = [SequenceFlow("s", "a"), SequenceFlow("a", "e")]
    d1 = _def("p", nodes, flows)
    d2 = _def("p", list(reversed(nodes)), list(reversed(flows)))
    assert d1 == d2
    assert [n.id for n in d1.nodes] == sorted(n.id for n in nodes)


def test_flow_tags_coerced_to_frozenset():
    f = SequenceFlow("a", "b", {"v2", "v1"})
    assert isinstance(f.variant_tags, frozenset)
    assert f == SequenceFlow("a", "b", frozenset({"v1", "v2"}))


def test_repository_lookup_and_replacement():
    d = chain_def("p", ["A"])
    repo = ProcessRepository((d,), "p")
    assert repo.has("p") and not repo.has("q")
    assert repo.get("p") is repo.root_definition()
    with pytest.raises(KeyError):
        repo.get("q")
    swapped = repo.with_definition(chain_def("p", ["B"]))
    assert swapped.get("p").nodes != d.nodes
    assert repo.get("p") == d  # original untouched


def test_validate_clean_repository():
    main = chain_def("main", ["Do work"], calls={"main_n0": "sub"})
    sub = chain_def("sub", ["Step"], level=3)
    assert validate_repository(ProcessRepository((main, sub), "main")) == []


def _codes(repo):
    return {v.code for v in validate_repository(repo)}


def test_validate_flags_missing_events_and_labels():
    d = _def(
        "p",
        [ProcessNode("a", NodeKind.TASK, None)],
        [],
    )
    codes = _codes(ProcessRepository((d,), "p"))
    assert {"NoStart", "NoEnd", "MissingLabel"} <= codes


def test_validate_flags_callee_problems():
    d = _def(
        "p",
        [
            ProcessNode("s", NodeKind.START_EVENT),
            ProcessNode("c", NodeKind.SUB_PROCESS_CALL, "Call"),
            ProcessNode("t", NodeKind.TASK, "T", callee="x"),
            ProcessNode("e", NodeKind.END_EVENT),
        ],
        [SequenceFlow("s", "c"), SequenceFlow("c", "t"), SequenceFlow("t", "e")],
    )
    codes = _codes(ProcessRepository((d,), "p"))
    assert {"MissingCallee", "CalleeOnNonCall"} <= codes


def test_validate_flags_bad_flows():
    d = _def(
        "p",
        [
            ProcessNode("s", NodeKind.START_EVENT),
            ProcessNode("a", NodeKind.TASK, "A"),
            ProcessNode("e", NodeKind.END_EVENT),
        ],
        [
            SequenceFlow("s", "a"),
            SequenceFlow("a", "a"),
            SequenceFlow("a", "ghost"),
            SequenceFlow("a", "e"),
            SequenceFlow("a", "e", frozenset({"v1"})),
        ],
    )
    codes = _codes(ProcessRepository((d,), "p"))
    assert {"SelfLoopFlow", "DanglingFlowEndpoint", "DuplicateFlow"} <= codes


def test_validate_flags_cycles_and_reachability():
    cyclic = _def(
        "p",
        [
            ProcessNode("s", NodeKind.START_EVENT),
            ProcessNode("a", NodeKind.TASK, "A"),
            ProcessNode("b", NodeKind.TASK, "B"),
            ProcessNode("e", NodeKind.END_EVENT),
        ],
        [
            SequenceFlow("s", "a"),
            SequenceFlow("a", "b"),
            SequenceFlow("b", "a"),
            SequenceFlow("a", "e"),
        ],
    )
    assert "FlowCycle" in _codes(ProcessRepository((cyclic,), "p"))

    islands = _def(
        "p",
        [
            ProcessNode("s", NodeKind.START_EVENT),
            ProcessNode("a", NodeKind.TASK, "A"),
            ProcessNode("x", NodeKind.TASK, "X"),
            ProcessNode("y", NodeKind.TASK, "Y"),
            ProcessNode("e", NodeKind.END_EVENT),
        ],
        [
            SequenceFlow("s", "a"),
            SequenceFlow("a", "e"),
            SequenceFlow("x", "e"),  # unreachable from start
            SequenceFlow("s", "y"),  # cannot reach end
        ],
    )
    codes = _codes(ProcessRepository((islands,), "p"))
    assert {"Unreachable", "CannotReachEnd"} <= codes


def test_validate_repository_level_rules():
    main = chain_def("main", ["Do work"], calls={"main_n0": "sub"})
    wrong = chain_def("sub", ["Step"], level=5)  # expected 3
    codes = _codes(ProcessRepository((main, wrong), "main"))
    assert "BadCalleeLevel" in codes

    orphan_root = ProcessRepository((chain_def("p", ["A"], level=3),), "p")
    assert "RootLevel" in _codes(orphan_root)

    missing_root = ProcessRepository((chain_def("p", ["A"]),), "nope")
    assert "RootMissing" in _codes(missing_root)


def test_validate_flags_call_cycle():
    a = chain_def("a", ["Go"], calls={"a_n0": "b"})
    b = chain_def("b", ["Back"], level=3, calls={"b_n0": "a"})
    assert "CallCycle" in _codes(ProcessRepository((a, b), "a"))


def test_decomposition_level_checks_call_depth():
    main = chain_def("main", ["Do work"], calls={"main_n0": "sub"})
    sub = chain_def("sub", ["Step"], level=3)
    repo = ProcessRepository((main, sub), "main")
    assert decomposition_level(repo, "main") == 2
    assert decomposition_level(repo, "sub") == 3

    lying = ProcessRepository((main, chain_def("sub", ["Step"], level=4)), "main")
    with pytest.raises(ModelError):
        decomposition_level(lying, "sub")


def test_activity_nodes_covers_tasks_and_calls():
    main = chain_def("main", ["Do work"], calls={"main_n0": "sub"})
    sub = chain_def("sub", ["Step one", "Step two"], level=3)
    repo = ProcessRepository((main, sub), "main")
    labels = sorted(lbl for _, _, lbl in activity_nodes(repo))
    assert labels == ["do work", "step one", "step two"]  # normalized


def test_enumerate_traces_sequence():
    d = chain_def("p", ["A", "B", "C"])
    assert enumerate_traces(d) == [("A", "B", "C")]


def test_enumerate_traces_xor_split_yields_one_branch_per_run():
    d = _def(
        "p",
        [
            ProcessNode("s", NodeKind.START_EVENT),
            ProcessNode("g", NodeKind.XOR_SPLIT),
            ProcessNode("a", NodeKind.TASK, "A"),
            ProcessNode("b", NodeKind.TASK, "B"),
            ProcessNode("j", NodeKind.XOR_JOIN),
            ProcessNode("e", NodeKind.END_EVENT),
        ],
        [
            SequenceFlow("s", "g"),
            SequenceFlow("g", "a"),
            SequenceFlow("g", "b"),
            SequenceFlow("a", "j"),
            SequenceFlow("b", "j"),
            SequenceFlow("j", "e"),
        ],
    )
    assert enumerate_traces(d) == [("A",), ("B",)]


def test_enumerate_traces_and_block_interleavings():
    d = _def(
        "p",
        [
            ProcessNode("s", NodeKind.START_EVENT),
            ProcessNode("g", NodeKind.AND_SPLIT),
            ProcessNode("a", NodeKind.TASK, "A"),
            ProcessNode("b", NodeKind.TASK, "B"),
            ProcessNode("j", NodeKind.AND_JOIN),
            ProcessNode("e", NodeKind.END_EVENT),
        ],
        [
            SequenceFlow("s", "g"),
            SequenceFlow("g", "a"),
            SequenceFlow("g", "b"),
            SequenceFlow("a", "j"),
            SequenceFlow("b", "j"),
            SequenceFlow("j", "e"),
        ],
    )
    assert enumerate_traces(d) == [("A", "B"), ("B", "A")]


def test_enumerate_traces_end_event_swallows_one_token_per_firing():
    # Two tokens arrive at the end directly; it fires once per token.
    d = _def(
        "p",
        [
            ProcessNode("s", NodeKind.START_EVENT),
            ProcessNode("g", NodeKind.AND_SPLIT),
            ProcessNode("a", NodeKind.TASK, "A"),
            ProcessNode("b", NodeKind.TASK, "B"),
            ProcessNode("e", NodeKind.END_EVENT),
        ],
        [
            SequenceFlow("s", "g"),
            SequenceFlow("g", "a"),
            SequenceFlow("g", "b"),
            SequenceFlow("a", "e"),
            SequenceFlow("b", "e"),
        ],
    )
    assert enumerate_traces(d) == [("A", "B"), ("B", "A")]


def test_enumerate_traces_deadlock():
    # AndJoin waits on an arm the XorSplit never feeds.
    d = _def(
        "p",
        [
            ProcessNode("s", NodeKind.START_EVENT),
            ProcessNode("g", NodeKind.XOR_SPLIT),
            ProcessNode("a", NodeKind.TASK, "A"),
            ProcessNode("b", NodeKind.TASK, "B"),
            ProcessNode("j", NodeKind.AND_JOIN),
            ProcessNode("e", NodeKind.END_EVENT),
        ],
        [
            SequenceFlow("s", "g"),
            SequenceFlow("g", "a"),
            SequenceFlow("g", "b"),
            SequenceFlow("a", "j"),
            SequenceFlow("b", "j"),
            SequenceFlow("j", "e"),
        ],
    )
    with pytest.raises(DeadlockError):
        enumerate_traces(d)


def test_enumerate_traces_bound_and_cycle_guard():
    d = chain_def("p", ["A"])
    with pytest.raises(ValueError):
        enumerate_traces(d, bound=0)

    cyclic = _def(
        "p",
        [
            ProcessNode("s", NodeKind.START_EVENT),
            ProcessNode("a", NodeKind.TASK, "A"),
            ProcessNode("e", NodeKind.END_EVENT),
        ],
        [
            SequenceFlow("s", "a"),
            SequenceFlow("a", "a"),
            SequenceFlow("a", "e"),
        ],
    )
    with pytest.raises(ModelError):
        enumerate_traces(cyclic)

    wide = _def(
        "p",
        [
            ProcessNode("s", NodeKind.START_EVENT),
            ProcessNode("g", NodeKind.XOR_SPLIT),
            ProcessNode("a", NodeKind.TASK, "A"),
            ProcessNode("b", NodeKind.TASK, "B"),
            ProcessNode("e", NodeKind.END_EVENT),
        ],
        [
            SequenceFlow("s", "g"),
            SequenceFlow("g", "a"),
            SequenceFlow("g", "b"),
            SequenceFlow("a", "e"),
            SequenceFlow("b", "e"),
        ],
    )
    with pytest.raises(BoundExceeded):
        enumerate_traces(wide, bound=1)


def test_definition_size_counts_nodes_and_flows():
    d = chain_def("p", ["A", "B"])  # s, A, B, e plus 3 flows
    assert definition_size(d) == 7
