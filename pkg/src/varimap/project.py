"""The JSON project container bundling models, drivers, variant records,
similarity assessments, decision overrides, and decision configuration.

Documents carry `format_version: 1`. Loading is strict: unknown fields and
dangling references are rejected with named errors, and the repository must
pass structural validation. save/load round-trips every field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from .decisions import DanglingReference, DecisionConfig, VariantRecord, Verdict, VerdictKind, derive_groups
from .drivers import DriverClass, StrengthRating, VariationDriver
from .model import (
    NodeKind,
    ProcessDefinition,
    ProcessNode,
    ProcessRepository,
    SequenceFlow,
    validate_repository,
)
from .similarity import SimilarityAssessment, SimilarityBand

FORMAT_VERSION = 1


class ProjectFormatError(Exception):
    pass


class VersionMismatch(Exception):
    def __init__(self, found):
        self.found = found
        super().__init__(f"unsupported format_version {found!r}, expected {FORMAT_VERSION}")


@dataclass(frozen=True)
class ProjectFile:
    repository: ProcessRepository
    drivers: tuple[VariationDriver, ...] = ()
    variants: tuple[VariantRecord, ...] = ()
    similarity_assessments: tuple[SimilarityAssessment, ...] = ()
    decision_overrides: tuple[tuple[str, Verdict], ...] = ()
    config: DecisionConfig = field(default_factory=DecisionConfig)

    def __post_init__(self):
        object.__setattr__(self, "drivers", tuple(self.drivers))
        object.__setattr__(self, "variants", tuple(self.variants))
        object.__setattr__(self, "similarity_assessments", tuple(self.similarity_assessments))
        object.__setattr__(self, "decision_overrides", tuple(tuple(pair) for pair in self.decision_overrides))

    def driver(self, driver_id: str) -> VariationDriver:
        for d in self.drivers:
            if d.id == driver_id:
                return d
        raise KeyError(driver_id)


def validate_project(project: ProjectFile) -> None:
    """Referential and structural checks; raises on the first problem."""
    violations = validate_repository(project.repository)
    if violations:
        summary = "; ".join(f"{v.code}: {v.message}" for v in violations[:5])
        raise ProjectFormatError(f"repository fails validation: {summary}")
    driver_ids = [d.id for d in project.drivers]
    if len(driver_ids) != len(set(driver_ids)):
        raise ProjectFormatError("duplicate driver id")
    variant_ids = [v.id for v in project.variants]
    if len(variant_ids) != len(set(variant_ids)):
        raise ProjectFormatError("duplicate variant id")
    known_variants = set(variant_ids)
    for record in project.variants:
        if record.driver not in set(driver_ids):
            raise DanglingReference(record.driver, f"driver of variant {record.id}")
        if not project.repository.has(record.subprocess):
            raise DanglingReference(record.subprocess, f"sub-process of variant {record.id}")
        if record.model is not None and not project.repository.has(record.model):
            raise DanglingReference(record.model, f"model of variant {record.id}")
    for assessment in project.similarity_assessments:
        for variant in assessment.group:
            if variant not in known_variants:
                raise DanglingReference(variant, "similarity assessment group")
    group_ids = {g.id for g in derive_groups(project)}
    for group_id, _ in project.decision_overrides:
        if group_id not in group_ids:
            raise DanglingReference(group_id, "decision override")


def _check_keys(obj: dict, allowed: set[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ProjectFormatError(f"unknown field {sorted(unknown)[0]!r} in {where}")


def _node_to_obj(node: ProcessNode) -> dict:
    obj: dict = {"id": node.id, "kind": node.kind.value}
    if node.label is not None:
        obj["label"] = node.label
    if node.callee is not None:
        obj["callee"] = node.callee
    return obj


def _flow_to_obj(flow: SequenceFlow) -> dict:
    obj: dict = {"source": flow.source, "target": flow.target}
    if flow.variant_tags:
        obj["when"] = sorted(flow.variant_tags)
    return obj


def definition_to_obj(def_: ProcessDefinition) -> dict:
    return {
        "id": def_.id,
        "name": def_.name,
        "level": def_.level,
        "nodes": [_node_to_obj(n) for n in def_.nodes],
        "flows": [_flow_to_obj(f) for f in def_.flows],
    }


def repository_to_obj(repo: ProcessRepository) -> dict:
    return {"root": repo.root, "definitions": [definition_to_obj(d) for d in repo.definitions]}


def _driver_to_obj(driver: VariationDriver) -> dict:
    return {
        "id": driver.id,
        "name": driver.name,
        "class": driver.driver_class.value,
        "subcategories": list(driver.subcategories),
        "strength": driver.strength.value,
        "rationale": driver.rationale,
    }


def _variant_to_obj(record: VariantRecord) -> dict:
    obj = {
        "id": record.id,
        "driver": record.driver,
        "subcategory_path": record.subcategory_path,
        "subprocess": record.subprocess,
    }
    if record.model is not None:
        obj["model"] = record.model
    return obj


def _assessment_to_obj(a: SimilarityAssessment) -> dict:
    obj: dict = {"group": sorted(a.group), "band": a.band.value, "source": a.source}
    if a.score is not None:
        obj["score"] = a.score
    return obj


def verdict_to_obj(verdict: Verdict) -> dict:
    obj: dict = {"kind": verdict.kind.value}
    if verdict.default is not None:
        obj["default"] = verdict.default.value
    return obj


def _config_to_obj(cfg: DecisionConfig) -> dict:
    return {
        "high_levels": sorted(cfg.high_levels),
        "low_levels": sorted(cfg.low_levels),
        "very_strong_forces_separate": cfg.very_strong_forces_separate,
        "analyst_choice_default_low_dissimilar": cfg.analyst_choice_default_low_dissimilar.value,
        "overrides_replace_any": cfg.overrides_replace_any,
    }


def project_to_obj(project: ProjectFile) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "repository": repository_to_obj(project.repository),
        "drivers": [_driver_to_obj(d) for d in project.drivers],
        "variants": [_variant_to_obj(v) for v in project.variants],
        "similarity_assessments": [_assessment_to_obj(a) for a in project.similarity_assessments],
        "decision_overrides": [
            {"group": group_id, "verdict": verdict_to_obj(verdict)}
            for group_id, verdict in project.decision_overrides
        ],
        "config": _config_to_obj(project.config),
    }


def save_project(project: ProjectFile) -> bytes:
    validate_project(project)
    return (json.dumps(project_to_obj(project), indent=2) + "\n").encode("utf-8")


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise ProjectFormatError(f"missing field {key!r} in {where}")
    return obj[key]


def _enum(cls, value, where: str):
    try:
        return cls(value)
    except ValueError:
        raise ProjectFormatError(f"unknown {cls.__name__} value {value!r} in {where}") from None


def _node_from_obj(obj: dict, where: str) -> ProcessNode:
    _check_keys(obj, {"id", "kind", "label", "callee"}, where)
    return ProcessNode(
        _require(obj, "id", where),
        _enum(NodeKind, _require(obj, "kind", where), where),
        obj.get("label"),
        obj.get("callee"),
    )


def _flow_from_obj(obj: dict, where: str) -> SequenceFlow:
    _check_keys(obj, {"source", "target", "when"}, where)
    return SequenceFlow(
        _require(obj, "source", where),
        _require(obj, "target", where),
        frozenset(obj.get("when", ())),
    )


def definition_from_obj(obj: dict) -> ProcessDefinition:
    where = f"definition {obj.get('id', '?')!r}"
    _check_keys(obj, {"id", "name", "level", "nodes", "flows"}, where)
    def_id = _require(obj, "id", where)
    return ProcessDefinition(
        def_id,
        obj.get("name", def_id),
        _require(obj, "level", where),
        tuple(_node_from_obj(n, where) for n in _require(obj, "nodes", where)),
        tuple(_flow_from_obj(f, where) for f in _require(obj, "flows", where)),
    )


def repository_from_obj(obj: dict) -> ProcessRepository:
    _check_keys(obj, {"root", "definitions"}, "repository")
    return ProcessRepository(
        tuple(definition_from_obj(d) for d in _require(obj, "definitions", "repository")),
        _require(obj, "root", "repository"),
    )


def _driver_from_obj(obj: dict) -> VariationDriver:
    where = f"driver {obj.get('id', '?')!r}"
    _check_keys(obj, {"id", "name", "class", "subcategories", "strength", "rationale"}, where)
    return VariationDriver(
        _require(obj, "id", where),
        _require(obj, "name", where),
        _enum(DriverClass, _require(obj, "class", where), where),
        tuple(_require(obj, "subcategories", where)),
        _enum(StrengthRating, _require(obj, "strength", where), where),
        obj.get("rationale", ""),
    )


def _variant_from_obj(obj: dict) -> VariantRecord:
    where = f"variant {obj.get('id', '?')!r}"
    _check_keys(obj, {"id", "driver", "subcategory_path", "subprocess", "model"}, where)
    return VariantRecord(
        _require(obj, "id", where),
        _require(obj, "driver", where),
        _require(obj, "subcategory_path", where),
        _require(obj, "subprocess", where),
        obj.get("model"),
    )


def _assessment_from_obj(obj: dict) -> SimilarityAssessment:
    where = "similarity assessment"
    _check_keys(obj, {"group", "band", "source", "score"}, where)
    try:
        return SimilarityAssessment(
            frozenset(_require(obj, "group", where)),
            _enum(SimilarityBand, _require(obj, "band", where), where),
            obj.get("source", "manual"),
            obj.get("score"),
        )
    except ValueError as ex:
        raise ProjectFormatError(f"{where}: {ex}") from None


def verdict_from_obj(obj: dict, where: str = "verdict") -> Verdict:
    _check_keys(obj, {"kind", "default"}, where)
    default = obj.get("default")
    try:
        return Verdict(
            _enum(VerdictKind, _require(obj, "kind", where), where),
            _enum(VerdictKind, default, where) if default is not None else None,
        )
    except ValueError as ex:
        raise ProjectFormatError(f"{where}: {ex}") from None


def _override_from_obj(obj: dict) -> tuple[str, Verdict]:
    _check_keys(obj, {"group", "verdict"}, "decision override")
    return (
        _require(obj, "group", "decision override"),
        verdict_from_obj(_require(obj, "verdict", "decision override"), "decision override verdict"),
    )


def _config_from_obj(obj: dict) -> DecisionConfig:
    _check_keys(
        obj,
        {
            "high_levels",
            "low_levels",
            "very_strong_forces_separate",
            "analyst_choice_default_low_dissimilar",
            "overrides_replace_any",
        },
        "config",
    )
    defaults = DecisionConfig()
    try:
        return DecisionConfig(
            frozenset(obj.get("high_levels", defaults.high_levels)),
            frozenset(obj.get("low_levels", defaults.low_levels)),
            obj.get("very_strong_forces_separate", defaults.very_strong_forces_separate),
            _enum(VerdictKind, obj["analyst_choice_default_low_dissimilar"], "config")
            if "analyst_choice_default_low_dissimilar" in obj
            else defaults.analyst_choice_default_low_dissimilar,
            obj.get("overrides_replace_any", defaults.overrides_replace_any),
        )
    except ValueError as ex:
        raise ProjectFormatError(f"config: {ex}") from None


_TOP_KEYS = {
    "format_version",
    "repository",
    "drivers",
    "variants",
    "similarity_assessments",
    "decision_overrides",
    "config",
}


def load_project(data: bytes, *, check: bool = True) -> ProjectFile:
    try:
        obj = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as ex:
        raise ProjectFormatError(f"malformed project document: {ex}") from None
    if not isinstance(obj, dict):
        raise ProjectFormatError("project document must be a JSON object")
    _check_keys(obj, _TOP_KEYS, "project")
    version = _require(obj, "format_version", "project")
    if version != FORMAT_VERSION:
        raise VersionMismatch(version)
    try:
        project = ProjectFile(
            repository_from_obj(_require(obj, "repository", "project")),
            tuple(_driver_from_obj(d) for d in obj.get("drivers", ())),
            tuple(_variant_from_obj(v) for v in obj.get("variants", ())),
            tuple(_assessment_from_obj(a) for a in obj.get("similarity_assessments", ())),
            tuple(_override_from_obj(o) for o in obj.get("decision_overrides", ())),
            _config_from_obj(obj.get("config", {})),
        )
    except ValueError as ex:
        raise ProjectFormatError(str(ex)) from None
    if check:
        validate_project(project)
    return project


def with_driver_strength(project: ProjectFile, driver_id: str, strength: StrengthRating) -> ProjectFile:
    if not any(d.id == driver_id for d in project.drivers):
        raise DanglingReference(driver_id, "driver rating")
    drivers = tuple(replace(d, strength=strength) if d.id == driver_id else d for d in project.drivers)
    return replace(project, drivers=drivers)


def with_group_band(project: ProjectFile, group_id: str, band: SimilarityBand) -> ProjectFile:
    """Record a manual band for the group's variant set, replacing any
    previous manual assessment of the same set."""
    groups = {g.id: g for g in derive_groups(project)}
    group = groups.get(group_id)
    if group is None:
        raise DanglingReference(group_id, "similarity band")
    key = frozenset(group.variants)
    kept = tuple(a for a in project.similarity_assessments if not (a.group == key and a.source == "manual"))
    return replace(project, similarity_assessments=kept + (SimilarityAssessment(key, band, "manual"),))
