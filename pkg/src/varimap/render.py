"""Shared report builders.

The CLI and the HTTP service both emit what these functions produce, so a
JSON body fetched from the service is byte-identical to the corresponding
CLI output. Text tables are aligned with plain spaces; CSV uses the stdlib
writer with Unix line endings.
"""

from __future__ import annotations

import csv
import io
import json

from .decisions import DecisionRow, VariationMap
from .metrics import CompareReport, MetricsReport, format_percent, round_half_up
from .model import Violation
from .project import definition_to_obj, verdict_to_obj


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)).rstrip(),
        "  ".join("-" * widths[i] for i in range(len(headers))),
    ]
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
    return "\n".join(lines) + "\n"


def _csv(headers: list[str], rows: list[list[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(headers)
    writer.writerows(rows)
    return buffer.getvalue()


# ---- violations ----


def violations_text(violations: list[Violation]) -> str:
    if not violations:
        return "ok\n"
    lines = []
    for v in violations:
        subject = f".{v.subject}" if v.subject else ""
        lines.append(f"{v.code} {v.definition_id}{subject}: {v.message}")
    return "\n".join(lines) + "\n"


# ---- variation matrix ----


def matrix_obj(matrix) -> dict:
    cells = []
    for driver in matrix.rows:
        for column_id, _ in matrix.columns:
            cell = matrix.cells.get((driver.id, column_id))
            if cell is None:
                continue
            cells.append(
                {
                    "driver": driver.id,
                    "subprocess": column_id,
                    "band": cell.band.value if cell.band is not None else None,
                    "identical": cell.identical,
                    "entries": [
                        {"variant": e.variant, "subcategory_path": e.subcategory_path}
                        for e in cell.entries
                    ],
                }
            )
    return {
        "rows": [
            {
                "id": d.id,
                "name": d.name,
                "class": d.driver_class.value,
                "strength": d.strength.value,
                "subcategories": list(d.subcategories),
            }
            for d in matrix.rows
        ],
        "columns": [{"id": cid, "label": label} for cid, label in matrix.columns],
        "cells": cells,
    }


def _cell_text(cell) -> str:
    if cell is None:
        return ""
    entries = "; ".join(f"{e.variant}({e.subcategory_path})" for e in cell.entries)
    if cell.band is not None:
        entries += f" [{cell.band.value}]"
    return entries


def matrix_text(matrix) -> str:
    headers = ["driver"] + [label for _, label in matrix.columns]
    rows = []
    for driver in matrix.rows:
        row = [f"{driver.name} ({driver.strength.value})"]
        for column_id, _ in matrix.columns:
            row.append(_cell_text(matrix.cells.get((driver.id, column_id))))
        rows.append(row)
    return _table(headers, rows)


def matrix_csv(matrix) -> str:
    headers = ["driver", "strength"] + [cid for cid, _ in matrix.columns]
    rows = []
    for driver in matrix.rows:
        row = [driver.id, driver.strength.value]
        for column_id, _ in matrix.columns:
            row.append(_cell_text(matrix.cells.get((driver.id, column_id))))
        rows.append(row)
    return _csv(headers, rows)


# ---- decisions ----


def _decision_row_obj(row: DecisionRow) -> dict:
    return {
        "group": row.group.id,
        "subprocess": row.group.subprocess,
        "driver": row.group.driver,
        "variants": list(row.group.variants),
        "level": row.level,
        "strength": row.strength.value,
        "band": row.group.band.value if row.group.band is not None else None,
        "verdict": verdict_to_obj(row.verdict),
        "effective": row.verdict.effective().value,
        "rule": row.rule,
        "source": row.source,
    }


def decisions_obj(rows: dict[str, DecisionRow]) -> dict:
    return {"rows": [_decision_row_obj(r) for r in rows.values()]}


def _decision_cells(row: DecisionRow) -> list[str]:
    return [
        row.group.id,
        row.group.subprocess,
        row.group.driver,
        str(row.level),
        row.strength.value,
        row.group.band.value if row.group.band is not None else "",
        row.verdict.render(),
        row.rule,
        row.source,
    ]


_DECISION_HEADERS = ["group", "subprocess", "driver", "level", "strength", "band", "verdict", "rule", "source"]


def decisions_text(rows: dict[str, DecisionRow]) -> str:
    return _table(_DECISION_HEADERS, [_decision_cells(r) for r in rows.values()])


def decisions_csv(rows: dict[str, DecisionRow]) -> str:
    return _csv(_DECISION_HEADERS, [_decision_cells(r) for r in rows.values()])


# ---- variation map ----


def map_obj(vmap: VariationMap, rows: dict[str, DecisionRow]) -> dict:
    branches = []
    for branch in vmap.branches:
        row = rows.get(branch.group_id)
        provenance = {}
        if row is not None:
            provenance = {
                "verdict": verdict_to_obj(row.verdict),
                "effective": row.verdict.effective().value,
                "rule": row.rule,
                "strength": row.strength.value,
                "band": row.group.band.value if row.group.band is not None else None,
                "level": row.level,
            }
        branches.append(
            {
                "subprocess": branch.subprocess,
                "group": branch.group_id,
                "variants": list(branch.variants),
                "label": branch.label,
                "call_node": branch.call_node,
                "split_node": branch.split_node,
                "join_node": branch.join_node,
                **provenance,
            }
        )
    return {"definition": definition_to_obj(vmap.definition), "branches": branches}


# ---- metrics ----


def metrics_obj(report: MetricsReport) -> dict:
    return {
        "model_count": report.model_count,
        "main_count": report.main_count,
        "subprocess_count": report.subprocess_count,
        "activity_node_count": report.activity_node_count,
        "duplicate_occurrences": report.duplicate_occurrences,
        "duplication_rate": report.duplication_rate,
        "duplication_percent": format_percent(report.duplication_rate),
        "arc_count": report.arc_count,
        "node_count": report.node_count,
        "cnc": report.cnc,
    }


_METRIC_ROWS = [
    ("models", lambda r: str(r.model_count)),
    ("main models", lambda r: str(r.main_count)),
    ("sub-process models", lambda r: str(r.subprocess_count)),
    ("activity nodes", lambda r: str(r.activity_node_count)),
    ("duplicate occurrences", lambda r: str(r.duplicate_occurrences)),
    ("duplication rate", lambda r: format_percent(r.duplication_rate)),
    ("arcs", lambda r: str(r.arc_count)),
    ("nodes", lambda r: str(r.node_count)),
    ("cnc", lambda r: f"{r.cnc:.2f}"),
]


def metrics_text(report: MetricsReport) -> str:
    return _table(["metric", "value"], [[name, get(report)] for name, get in _METRIC_ROWS])


def metrics_csv(report: MetricsReport) -> str:
    return _csv(["metric", "value"], [[name, get(report)] for name, get in _METRIC_ROWS])


# ---- comparison ----


def _delta_pct(value: float | None) -> str:
    if value is None:
        return "n/a"
    return f"{round_half_up(value):+d}%"


def compare_obj(report: CompareReport) -> dict:
    d = report.deltas
    return {
        "consolidated": metrics_obj(report.consolidated),
        "fragmented": metrics_obj(report.fragmented),
        "deltas": {
            "activity_nodes_pct": d.activity_nodes_pct,
            "subprocess_models_pct": d.subprocess_models_pct,
            "duplication_rate_pts": d.duplication_rate_pts,
            "cnc_pct": d.cnc_pct,
            "rendered": {
                "activity_nodes": _delta_pct(d.activity_nodes_pct),
                "subprocess_models": _delta_pct(d.subprocess_models_pct),
                "duplication_rate": f"{round_half_up(d.duplication_rate_pts):+d} pts",
                "cnc": _delta_pct(d.cnc_pct),
            },
        },
    }


def compare_text(report: CompareReport) -> str:
    d = report.deltas
    deltas = {
        "activity nodes": _delta_pct(d.activity_nodes_pct),
        "sub-process models": _delta_pct(d.subprocess_models_pct),
        "duplication rate": f"{round_half_up(d.duplication_rate_pts):+d} pts",
        "cnc": _delta_pct(d.cnc_pct),
    }
    rows = []
    for name, get in _METRIC_ROWS:
        rows.append([name, get(report.fragmented), get(report.consolidated), deltas.get(name, "")])
    return _table(["metric", "fragmented", "consolidated", "delta"], rows)


def compare_csv(report: CompareReport) -> str:
    d = report.deltas
    deltas = {
        "activity nodes": _delta_pct(d.activity_nodes_pct),
        "sub-process models": _delta_pct(d.subprocess_models_pct),
        "duplication rate": f"{round_half_up(d.duplication_rate_pts):+d} pts",
        "cnc": _delta_pct(d.cnc_pct),
    }
    rows = []
    for name, get in _METRIC_ROWS:
        rows.append([name, get(report.fragmented), get(report.consolidated), deltas.get(name, "")])
    return _csv(["metric", "fragmented", "consolidated", "delta"], rows)
