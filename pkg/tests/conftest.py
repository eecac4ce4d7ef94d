"""Shared builders for the test suite."""

from __future__ import annotations

import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from varimap.decisions import VariantRecord
from varimap.drivers import DriverClass, StrengthRating, VariationDriver
from varimap.model import (
    NodeKind,
    ProcessDefinition,
    ProcessNode,
    ProcessRepository,
    SequenceFlow,
)
from varimap.project import ProjectFile
from varimap.similarity import SimilarityAssessment, SimilarityBand

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURES, name)


def chain_def(
    def_id: str,
    labels: list[str],
    level: int = 2,
    calls: dict[str, str] | None = None,
    name: str | None = None,
) -> ProcessDefinition:
    """Linear model: start, one node per label, end. Node ids are
    <def_id>_n<i>; entries in calls map node id to callee, making that node a
    sub-process call instead of a task."""
    calls = calls or {}
    nodes = [ProcessNode("s", NodeKind.START_EVENT), ProcessNode("e", NodeKind.END_EVENT)]
    flows = []
    prev = "s"
    for i, label in enumerate(labels):
        node_id = f"{def_id}_n{i}"
        if node_id in calls:
            nodes.append(ProcessNode(node_id, NodeKind.SUB_PROCESS_CALL, label, calls[node_id]))
        else:
            nodes.append(ProcessNode(node_id, NodeKind.TASK, label))
        flows.append(SequenceFlow(prev, node_id))
        prev = node_id
    flows.append(SequenceFlow(prev, "e"))
    return ProcessDefinition(def_id, name or def_id, level, tuple(nodes), tuple(flows))


def banking_project() -> ProjectFile:
    """Trade-processing style fixture: six-step main process, product and
    customer drivers, four variant groups with the bands that drive the
    documented verdicts."""
    main = chain_def(
        "main",
        ["Register Trade", "Approve Trade", "Confirm Trade", "Match Trade", "Settle Trade", "Book Trade"],
        level=2,
        calls={
            "main_n0": "sub_register",
            "main_n1": "sub_approve",
            "main_n2": "sub_confirm",
            "main_n3": "sub_match",
            "main_n4": "sub_settle",
            "main_n5": "sub_book",
        },
        name="Trade processing",
    )
    defs = [
        main,
        chain_def("sub_register", ["Capture counterparty", "Capture trade details", "Check limits"], 3),
        chain_def("sub_approve", ["Review trade", "Grant approval"], 3),
        chain_def("sub_confirm", ["Generate confirmation", "Dispatch confirmation"], 3),
        chain_def("sub_match", ["Pair trade legs", "Resolve breaks"], 3),
        chain_def("sub_settle", ["Instruct settlement", "Release payment"], 3),
        chain_def("sub_book", ["Post to ledger", "Archive trade"], 3),
        chain_def(
            "m_reg_bank",
            ["Capture counterparty", "Capture trade details", "Check limits", "Verify bank references"],
            3,
        ),
        chain_def(
            "m_reg_corporate",
            ["Capture counterparty", "Capture trade details", "Check limits", "Verify corporate account"],
            3,
        ),
        chain_def(
            "m_reg_private",
            ["Capture counterparty", "Capture trade details", "Check limits", "Verify identity papers"],
            3,
        ),
        chain_def(
            "m_reg_site",
            ["Capture counterparty", "Capture trade details", "Check limits", "Verify site mandate"],
            3,
        ),
        chain_def(
            "m_conf_fxmm",
            ["Generate confirmation", "Send swift confirmation", "File confirmation"],
            3,
        ),
        chain_def(
            "m_conf_ndf",
            ["Draft ndf terms", "Exchange fixing details", "Obtain counterparty signature", "Archive agreement"],
            3,
        ),
    ]
    drivers = (
        VariationDriver(
            "product",
            "Product type",
            DriverClass.PRODUCT,
            ("FX", "MM", "NDF"),
            StrengthRating.VERY_STRONG,
            "Product families shape the whole handling chain.",
        ),
        VariationDriver(
            "customer",
            "Customer type",
            DriverClass.CUSTOMER,
            ("Bank", "Corporate", "Private", "Site"),
            StrengthRating.SOMEWHAT_STRONG,
            "Customer categories change checks and matching.",
        ),
    )
    variants = (
        VariantRecord("reg_bank", "customer", "Bank", "sub_register", "m_reg_bank"),
        VariantRecord("reg_corporate", "customer", "Corporate", "sub_register", "m_reg_corporate"),
        VariantRecord("reg_private", "customer", "Private", "sub_register", "m_reg_private"),
        VariantRecord("reg_site", "customer", "Site", "sub_register", "m_reg_site"),
        VariantRecord("conf_fxmm", "product", "FX+MM", "sub_confirm", "m_conf_fxmm"),
        VariantRecord("conf_ndf", "product", "NDF", "sub_confirm", "m_conf_ndf"),
        VariantRecord("match_intellimatch", "customer", "Bank/Intellimatch", "sub_match", None),
        VariantRecord("match_cls", "customer", "Bank/CLS", "sub_match", None),
        VariantRecord("match_bulk", "customer", "Corporate/Bulk", "sub_match", None),
        VariantRecord("match_single", "customer", "Private/Single trade", "sub_match", None),
        VariantRecord("settle_fxmm", "product", "FX+MM", "sub_settle", None),
        VariantRecord("settle_ndf", "product", "NDF", "sub_settle", None),
    )
    assessments = (
        SimilarityAssessment(
            frozenset({"reg_bank", "reg_corporate", "reg_private", "reg_site"}),
            SimilarityBand.VERY_SIMILAR,
            "manual",
        ),
        SimilarityAssessment(frozenset({"conf_fxmm", "conf_ndf"}), SimilarityBand.NOT_SIMILAR, "manual"),
        SimilarityAssessment(
            frozenset({"match_intellimatch", "match_cls", "match_bulk", "match_single"}),
            SimilarityBand.NOT_SIMILAR,
            "manual",
        ),
        SimilarityAssessment(frozenset({"settle_fxmm", "settle_ndf"}), SimilarityBand.SOMEWHAT_SIMILAR, "manual"),
    )
    return ProjectFile(ProcessRepository(tuple(defs), "main"), drivers, variants, assessments)


def _label_pool(prefix: str, count: int) -> list[str]:
    return [f"{prefix} {i:03d}" for i in range(count)]


def aggregate_pair() -> tuple[ProcessRepository, ProcessRepository]:
    """Synthetic repositories shaped to hit known aggregate counts.

    Fragmented: four top-level models calling 35 distinct sub-processes of
    five tasks each; among the 175 task labels one appears three times and 36
    appear twice, so 210 activities carry 75 duplicate occurrences.
    Consolidated: one top-level model calling 17 sub-processes holding 132
    tasks with 11 labels doubled, so 149 activities carry 22 duplicates.
    """
    # fragmented side
    dup3 = ["Shared step X"] * 3
    dup2 = [label for i in range(36) for label in (f"Shared step {i:02d}",) * 2]
    unique = _label_pool("Frag task", 175 - len(dup3) - len(dup2))
    labels = dup3 + dup2 + unique
    assert len(labels) == 175
    frag_defs = []
    sub_index = 0
    cursor = 0
    for m, call_count in enumerate([9, 9, 9, 8]):
        callees = {}
        call_labels = []
        for _ in range(call_count):
            sub_id = f"fsub{sub_index:02d}"
            sub_labels = labels[cursor : cursor + 5]
            cursor += 5
            frag_defs.append(chain_def(sub_id, sub_labels, level=3))
            callees[f"fmain{m}_n{len(call_labels)}"] = sub_id
            call_labels.append(f"Frag call {sub_index:02d}")
            sub_index += 1
        frag_defs.append(chain_def(f"fmain{m}", call_labels, level=2, calls=callees))
    fragmented = ProcessRepository(tuple(frag_defs), "fmain0")

    # consolidated side
    dup2c = [label for i in range(11) for label in (f"Kept step {i:02d}",) * 2]
    uniquec = _label_pool("Cons task", 132 - len(dup2c))
    labelsc = dup2c + uniquec
    assert len(labelsc) == 132
    sizes = [8] * 13 + [7] * 4
    assert sum(sizes) == 132
    cons_defs = []
    callees = {}
    call_labels = []
    cursor = 0
    for i, size in enumerate(sizes):
        sub_id = f"csub{i:02d}"
        cons_defs.append(chain_def(sub_id, labelsc[cursor : cursor + size], level=3))
        cursor += size
        callees[f"cmain_n{i}"] = sub_id
        call_labels.append(f"Cons call {i:02d}")
    cons_defs.append(chain_def("cmain", call_labels, level=2, calls=callees))
    consolidated = ProcessRepository(tuple(cons_defs), "cmain")
    return consolidated, fragmented


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance criteria:")
    for name, status in RESULTS:
        terminalreporter.write_line(f"  {name}: {status}")


@pytest.fixture()
def banking():
    return banking_project()
