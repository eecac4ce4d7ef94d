"""What-if evaluation: apply non-persistent overrides to a project and
recompute verdicts, the variation map, and the consolidated-vs-fragmented
comparison. Pure function of (base project, overrides)."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .consolidation import decide_rows_for_map, project_baseline, project_consolidate
from .decisions import DanglingReference, Verdict, build_variation_map, decide_project, derive_groups
from .drivers import StrengthRating
from .metrics import compare_report
from .project import ProjectFile, with_driver_strength, with_group_band
from .render import compare_obj, decisions_obj, map_obj
from .similarity import SimilarityBand


@dataclass(frozen=True)
class Scenario:
    rating_overrides: dict[str, StrengthRating] = field(default_factory=dict)
    band_overrides: dict[str, SimilarityBand] = field(default_factory=dict)
    verdict_overrides: dict[str, Verdict] = field(default_factory=dict)


def apply_scenario(project: ProjectFile, scenario: Scenario) -> ProjectFile:
    applied = project
    for driver_id, strength in sorted(scenario.rating_overrides.items()):
        applied = with_driver_strength(applied, driver_id, strength)
    for group_id, band in sorted(scenario.band_overrides.items()):
        applied = with_group_band(applied, group_id, band)
    if scenario.verdict_overrides:
        group_ids = {g.id for g in derive_groups(applied)}
        for group_id in scenario.verdict_overrides:
            if group_id not in group_ids:
                raise DanglingReference(group_id, "scenario verdict override")
        kept = tuple(
            (gid, verdict)
            for gid, verdict in applied.decision_overrides
            if gid not in scenario.verdict_overrides
        )
        added = tuple(sorted(scenario.verdict_overrides.items()))
        applied = replace(applied, decision_overrides=kept + added)
    return applied


def evaluate_scenario(project: ProjectFile, scenario: Scenario) -> dict:
    applied = apply_scenario(project, scenario)
    rows = decide_project(applied)
    map_rows = decide_rows_for_map(applied)
    vmap = build_variation_map(applied.repository.root_definition(), map_rows)
    consolidated, _ = project_consolidate(applied)
    fragmented = project_baseline(applied)
    comparison = compare_report(consolidated, fragmented)
    return {
        "verdicts": decisions_obj(rows),
        "map": map_obj(vmap, rows),
        "metrics": compare_obj(comparison),
    }
