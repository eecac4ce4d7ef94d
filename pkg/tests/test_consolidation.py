"""Variant merging, projection soundness, shared-model refactoring, baselines."""

import random

import pytest

from varimap.consolidation import (
    AmbiguousMatch,
    baseline_fragment,
    is_isomorphic,
    merge_variants,
    project_baseline,
    project_consolidate,
    project_variant,
    refactor_shared,
)
from varimap.decisions import VerdictKind
from varimap.metrics import duplicate_occurrences
from varimap.model import (
    ModelError,
    NodeKind,
    ProcessDefinition,
    ProcessNode,
    ProcessRepository,
    SequenceFlow,
    enumerate_traces,
    validate_repository,
)
from varimap.project import with_group_band
from varimap.similarity import MissingPair, SimilarityBand

from conftest import chain_def
from generators import random_structured_model


def _count(def_, kind):
    return sum(1 for n in def_.nodes if n.kind is kind)


def test_merge_identical_variants_needs_no_gateways():
    d = chain_def("d", ["A", "B", "C"])
    result = merge_variants([("v1", d), ("v2", d)])
    assert result.report.gateways_inserted == 0
    assert is_isomorphic(result.merged, d)
    assert enumerate_traces(result.merged) == enumerate_traces(d)


def test_merge_diverging_middle_inserts_one_split_and_join():
    v1 = chain_def("d1", ["A", "B", "C"])
    v2 = chain_def("d2", ["A", "D", "C"])
    result = merge_variants([("v1", v1), ("v2", v2)])
    merged = result.merged

    assert _count(merged, NodeKind.TASK) == 4  # A, B, D, C
    assert _count(merged, NodeKind.XOR_SPLIT) == 1
    assert _count(merged, NodeKind.XOR_JOIN) == 1
    assert result.report.gateways_inserted == 2
    assert result.report.matched_nodes == 4  # A, C, start, end

    # Shared flows carry no tags; variant-specific flows carry exactly one.
    tags = {frozenset(f.variant_tags) for f in merged.flows}
    assert frozenset() in tags
    assert all(t in (frozenset(), {"v1"}, {"v2"}) for t in tags)

    assert enumerate_traces(merged) == [("A", "B", "C"), ("A", "D", "C")]


def test_merged_projection_restores_each_variant():
    v1 = chain_def("d1", ["A", "B", "C"])
    v2 = chain_def("d2", ["A", "D", "C"])
    merged = merge_variants([("v1", v1), ("v2", v2)]).merged
    assert enumerate_traces(project_variant(merged, "v1")) == enumerate_traces(v1)
    assert enumerate_traces(project_variant(merged, "v2")) == enumerate_traces(v2)


def test_merge_first_seen_wins_and_mapping_tracks_nodes():
    v1 = chain_def("d1", ["Register trade"])
    v2 = chain_def("d2", ["  register   TRADE "])  # same label once normalized
    result = merge_variants([("v1", v1), ("v2", v2)])
    task = next(n for n in result.merged.nodes if n.kind is NodeKind.TASK)
    assert task.id == "d1_n0"
    assert task.label == "Register trade"
    assert result.mapping[("v2", "d2_n0")] == "d1_n0"


def test_merge_renames_colliding_ids():
    v1 = chain_def("d", ["A"])
    v2 = ProcessDefinition(
        "d2",
        "d2",
        2,
        (
            ProcessNode("s", NodeKind.START_EVENT),
            ProcessNode("d_n0", NodeKind.TASK, "B"),  # id clash, different label
            ProcessNode("e", NodeKind.END_EVENT),
        ),
        (SequenceFlow("s", "d_n0"), SequenceFlow("d_n0", "e")),
    )
    result = merge_variants([("v1", v1), ("v2", v2)])
    ids = {n.id for n in result.merged.nodes}
    assert "d_n0" in ids and "d_n0_m" in ids


def test_merge_rejects_ambiguous_labels_within_one_variant():
    bad = chain_def("d", ["Check", " check "])
    with pytest.raises(AmbiguousMatch) as exc:
        merge_variants([("v1", bad), ("v2", chain_def("d2", ["Check"]))])
    assert exc.value.variant_id == "v1"


def test_merge_rejects_contradicting_order():
    v1 = chain_def("d1", ["A", "B"])
    v2 = chain_def("d2", ["B", "A"])
    with pytest.raises(ModelError):
        merge_variants([("v1", v1), ("v2", v2)])


def test_merge_needs_two_variants():
    with pytest.raises(ValueError):
        merge_variants([("v1", chain_def("d", ["A"]))])


def test_merge_of_three_way_prefix_share():
    shared = ["Receive", "Validate"]
    variants = [
        ("v1", chain_def("d1", shared + ["Pack"])),
        ("v2", chain_def("d2", shared + ["Refund"])),
        ("v3", chain_def("d3", shared + ["Escalate"])),
    ]
    merged = merge_variants(variants).merged
    assert _count(merged, NodeKind.TASK) == 5
    assert _count(merged, NodeKind.XOR_SPLIT) == 1
    traces = enumerate_traces(merged)
    assert len(traces) == 3
    for vid, original in variants:
        assert enumerate_traces(project_variant(merged, vid)) == enumerate_traces(original)


def test_merge_is_idempotent_on_structured_models():
    rng = random.Random(11)
    for i in range(25):
        model = random_structured_model(rng, i)
        again = merge_variants([("a", model), ("b", model)]).merged
        assert is_isomorphic(again, model)


def test_is_isomorphic_ignores_ids_not_structure():
    a = chain_def("a", ["X", "Y"])
    b = chain_def("b", ["X", "Y"])
    c = chain_def("c", ["X", "Z"])
    assert is_isomorphic(a, b)
    assert not is_isomorphic(a, c)

    tagged = ProcessDefinition(
        "t",
        "t",
        2,
        a.nodes,
        tuple(SequenceFlow(f.source, f.target, frozenset({"v"})) for f in a.flows),
    )
    assert not is_isomorphic(a, tagged)  # edge tags are part of the shape


def test_refactor_shared_dedupes_and_repoints_callers():
    main = chain_def(
        "main", ["Left", "Right"], calls={"main_n0": "sub_a", "main_n1": "sub_b"}
    )
    sub_a = chain_def("sub_a", ["Same step"], level=3)
    sub_b = chain_def("sub_b", ["Same  STEP"], level=3)  # isomorphic modulo label noise
    repo = ProcessRepository((main, sub_a, sub_b), "main")
    before = enumerate_traces(repo.root_definition())

    out = refactor_shared(repo)
    assert {d.id for d in out.definitions} == {"main", "sub_a"}
    callees = [n.callee for n in out.root_definition().nodes if n.kind is NodeKind.SUB_PROCESS_CALL]
    assert callees == ["sub_a", "sub_a"]
    assert enumerate_traces(out.root_definition()) == before
    assert validate_repository(out) == []


def test_refactor_shared_keeps_the_root():
    a = chain_def("zz_root", ["Step"])
    b = chain_def("aa_copy", ["Step"])
    repo = ProcessRepository((a, b), "zz_root")
    out = refactor_shared(repo)
    assert {d.id for d in out.definitions} == {"zz_root"}
    assert out.root == "zz_root"


def test_baseline_fragment_clusters_by_band():
    x = chain_def("x", ["A", "B", "C"])
    y = chain_def("y", ["A", "B", "D"])
    z = chain_def("z", ["Q", "R"])
    sim = {
        frozenset({"vx", "vy"}): SimilarityBand.VERY_SIMILAR,
        frozenset({"vx", "vz"}): SimilarityBand.NOT_SIMILAR,
    }
    repo = baseline_fragment([("vx", x), ("vy", y), ("vz", z)], sim)
    # One merged model for the x/y cluster plus z as its own fragment.
    assert len(repo.definitions) == 2
    merged = repo.root_definition()
    assert _count(merged, NodeKind.XOR_SPLIT) == 1
    assert repo.has("z")


def test_baseline_fragment_dedupes_isomorphic_fragments():
    x = chain_def("x", ["A"])
    y = chain_def("y", ["A"])
    sim = {frozenset({"vx", "vy"}): SimilarityBand.NOT_SIMILAR}
    repo = baseline_fragment([("vx", x), ("vy", y)], sim)
    assert len(repo.definitions) == 1  # shared-definition pass still applies


def test_baseline_fragment_input_checks():
    with pytest.raises(ValueError):
        baseline_fragment([], {})
    deep = chain_def("d", ["A"], level=3)
    with pytest.raises(ValueError):
        baseline_fragment([("v", deep)], {})
    x = chain_def("x", ["A"])
    y = chain_def("y", ["B"])
    with pytest.raises(MissingPair):
        baseline_fragment([("vx", x), ("vy", y)], {})


def test_project_consolidate_banking(banking):
    repo, vmap = project_consolidate(banking)
    assert validate_repository(repo) == []
    assert repo.root == "main"
    assert {b.subprocess for b in vmap.branches} == {"sub_confirm", "sub_settle"}

    main = repo.root_definition()
    callees = {n.callee for n in main.nodes if n.kind is NodeKind.SUB_PROCESS_CALL}
    # The register group is Together with modelled variants: one merged model.
    merged_register = [c for c in callees if c and c.startswith("sub_register__")]
    assert len(merged_register) == 1
    merged_def = repo.get(merged_register[0])
    labels = {n.label for n in merged_def.nodes if n.kind is NodeKind.TASK}
    assert len(labels) == 7  # three shared steps plus one distinct check each
    # Confirm branches call the two variant models directly.
    assert {"m_conf_fxmm", "m_conf_ndf"} <= callees
    # Unmodelled groups keep the generic sub-process.
    assert "sub_match" in callees

    # Merge keeps every variant's behaviour: the merged register model
    # projects back onto each original variant model.
    for vid, model_id in (
        ("reg_bank", "m_reg_bank"),
        ("reg_corporate", "m_reg_corporate"),
        ("reg_private", "m_reg_private"),
        ("reg_site", "m_reg_site"),
    ):
        original = banking.repository.get(model_id)
        projected = project_variant(merged_def, vid)
        assert enumerate_traces(projected) == enumerate_traces(original)


def test_project_baseline_banking(banking):
    repo = project_baseline(banking)
    assert validate_repository(repo) == []
    assert repo.root == "main"
    # Register variants cluster into one fragment; confirm stays split in two.
    conf_models = [d.id for d in repo.definitions if "conf" in d.id]
    assert len(conf_models) == 2


def test_consolidation_reduces_duplication(banking):
    # A NotSimilar band keeps the register variants apart in the fragmented
    # baseline, while the weak customer driver still merges them under the
    # decision rules. The shared three-step prefix then shows up four times
    # in the baseline and once in the consolidated repository.
    project = with_group_band(banking, "sub_register:customer", SimilarityBand.NOT_SIMILAR)
    consolidated, _ = project_consolidate(project)
    fragmented = project_baseline(project)
    assert duplicate_occurrences(fragmented) == 12  # 3 shared labels x 4 fragments
    assert duplicate_occurrences(consolidated) < duplicate_occurrences(fragmented)
