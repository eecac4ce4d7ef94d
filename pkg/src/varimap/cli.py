"""Command-line interface.

Projects are JSON documents; a plain model file in the process DSL is also
accepted wherever a project is expected (it becomes a project with no
drivers). Exit codes: 0 success, 1 parse or validation failure, 2 dangling
or missing references, 3 unresolved analyst choices under --strict.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from .consolidation import (
    AmbiguousMatch,
    decide_rows_for_map,
    merge_variants,
    project_baseline,
    project_consolidate,
)
from .decisions import (
    DanglingReference,
    LevelOutsideConfig,
    MissingBand,
    VerdictKind,
    build_matrix,
    build_variation_map,
    decide_project,
    derive_groups,
)
from .dsl import DslSyntaxError, DslValidationError, ResolutionError, export_dot, parse_dsl, print_dsl
from .metrics import DUP_CONVENTIONS, compare_report, compute_metrics
from .model import ModelError, ProcessRepository, validate_repository
from .project import (
    ProjectFile,
    ProjectFormatError,
    VersionMismatch,
    load_project,
    validate_project,
)
from .render import (
    compare_csv,
    compare_obj,
    compare_text,
    decisions_csv,
    decisions_obj,
    decisions_text,
    dumps_json,
    map_obj,
    matrix_csv,
    matrix_obj,
    matrix_text,
    metrics_csv,
    metrics_obj,
    metrics_text,
    violations_text,
)
from .service import make_server, resolve_port
from .similarity import MissingPair, SizeGuardExceeded

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_REFERENCE = 2
EXIT_UNRESOLVED = 3

_PARSE_ERRORS = (
    DslSyntaxError,
    DslValidationError,
    ResolutionError,
    ProjectFormatError,
    VersionMismatch,
    ModelError,
    AmbiguousMatch,
    SizeGuardExceeded,
    ValueError,
)
_REFERENCE_ERRORS = (DanglingReference, MissingBand, MissingPair, LevelOutsideConfig)


def _read(path: str) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()


def _load(path: str, check: bool = True) -> ProjectFile:
    data = _read(path)
    if data.lstrip().startswith(b"{"):
        return load_project(data, check=check)
    repo = parse_dsl(data.decode("utf-8"))
    return ProjectFile(repo)


def _write_out(text: str, dest: str) -> None:
    if dest == "-":
        sys.stdout.write(text)
    else:
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(text)


def _standalone_repo(def_, source: ProcessRepository) -> ProcessRepository:
    """A repository whose root is the given definition, with its callee
    subtree pulled in and levels shifted so the root sits at level 2."""
    shift = def_.level - 2
    defs = {def_.id: def_}
    frontier = [def_]
    while frontier:
        for node in frontier.pop().nodes:
            if node.callee and node.callee not in defs and source.has(node.callee):
                defs[node.callee] = source.get(node.callee)
                frontier.append(defs[node.callee])
    shifted = tuple(replace(d, level=d.level - shift) for d in defs.values())
    return ProcessRepository(shifted, def_.id)


# ---- subcommands ----


def cmd_validate(args) -> int:
    data = _read(args.project)
    if data.lstrip().startswith(b"{"):
        project = load_project(data, check=False)
        violations = validate_repository(project.repository)
        sys.stdout.write(violations_text(violations))
        if violations:
            return EXIT_PARSE
        validate_project(project)  # referential errors escalate normally
        return EXIT_OK
    try:
        parse_dsl(data.decode("utf-8"))
    except DslValidationError as ex:
        sys.stdout.write(str(ex) + "\n")
        return EXIT_PARSE
    sys.stdout.write("ok\n")
    return EXIT_OK


def cmd_matrix(args) -> int:
    matrix = build_matrix(_load(args.project))
    if args.format == "json":
        sys.stdout.write(dumps_json(matrix_obj(matrix)))
    elif args.format == "csv":
        sys.stdout.write(matrix_csv(matrix))
    else:
        sys.stdout.write(matrix_text(matrix))
    return EXIT_OK


def cmd_decide(args) -> int:
    rows = decide_project(_load(args.project))
    if args.format == "json":
        sys.stdout.write(dumps_json(decisions_obj(rows)))
    elif args.format == "csv":
        sys.stdout.write(decisions_csv(rows))
    else:
        sys.stdout.write(decisions_text(rows))
    unresolved = [r.group.id for r in rows.values() if r.verdict.kind is VerdictKind.ANALYST_CHOICE]
    if args.strict and unresolved:
        print(f"unresolved analyst choices: {', '.join(unresolved)}", file=sys.stderr)
        return EXIT_UNRESOLVED
    return EXIT_OK


def cmd_map(args) -> int:
    project = _load(args.project)
    rows = decide_rows_for_map(project)
    vmap = build_variation_map(project.repository.root_definition(), rows)
    fmt = "dot" if args.dot else args.format
    if fmt == "json":
        _write_out(dumps_json(map_obj(vmap, rows)), args.output)
    elif fmt == "dot":
        _write_out(export_dot(vmap.definition), args.output)
    else:
        repo = project.repository.with_definition(vmap.definition)
        _write_out(print_dsl(repo), args.output)
    return EXIT_OK


def cmd_merge(args) -> int:
    project = _load(args.project)
    group = next((g for g in derive_groups(project) if g.id == args.group), None)
    if group is None:
        raise DanglingReference(args.group, "merge group")
    by_id = {v.id: v for v in project.variants}
    pairs = []
    for vid in group.variants:
        model_id = by_id[vid].model
        if model_id is None:
            raise DanglingReference(vid, "variant has no model to merge")
        pairs.append((vid, project.repository.get(model_id)))
    if len(pairs) == 1:
        merged = pairs[0][1]
        report = {"matched_nodes": len(merged.nodes), "unmatched_nodes": 0, "gateways_inserted": 0}
    else:
        result = merge_variants(pairs)
        merged = result.merged
        report = {
            "matched_nodes": result.report.matched_nodes,
            "unmatched_nodes": result.report.unmatched_nodes,
            "gateways_inserted": result.report.gateways_inserted,
        }
    _write_out(print_dsl(_standalone_repo(merged, project.repository)), args.output)
    if args.report:
        _write_out(dumps_json(report), args.report)
    return EXIT_OK


def cmd_baseline(args) -> int:
    project = _load(args.project)
    repo = project_baseline(project)
    text = print_dsl(repo)
    metrics = metrics_text(compute_metrics(repo, args.dup_convention))
    commented = "".join(f"# {line}\n" if line else "#\n" for line in metrics.splitlines())
    _write_out(text + "\n" + commented, args.output)
    return EXIT_OK


def cmd_metrics(args) -> int:
    project = _load(args.project)
    report = compute_metrics(project.repository, args.dup_convention)
    if args.format == "json":
        sys.stdout.write(dumps_json(metrics_obj(report)))
    elif args.format == "csv":
        sys.stdout.write(metrics_csv(report))
    else:
        sys.stdout.write(metrics_text(report))
    if args.figures:
        from .figures import render_metrics_figures

        for path in render_metrics_figures(report, args.figures):
            print(f"figure: {path}", file=sys.stderr)
    return EXIT_OK


def cmd_compare(args) -> int:
    project = _load(args.project)
    consolidated, _ = project_consolidate(project)
    fragmented = project_baseline(project)
    report = compare_report(consolidated, fragmented, args.dup_convention)
    if args.format == "json":
        sys.stdout.write(dumps_json(compare_obj(report)))
    elif args.format == "csv":
        sys.stdout.write(compare_csv(report))
    else:
        sys.stdout.write(compare_text(report))
    if args.figures:
        from .figures import render_compare_figures

        for path in render_compare_figures(report, args.figures):
            print(f"figure: {path}", file=sys.stderr)
    return EXIT_OK


def cmd_serve(args) -> int:
    project = _load(args.project)
    port = resolve_port(args.port)
    ui_dir = args.ui_dir
    if ui_dir is None:
        candidate = os.path.join(os.getcwd(), "frontend", "dist")
        ui_dir = candidate if os.path.isdir(candidate) else None
    server = make_server(project, port, ui_dir, quiet=False)
    actual = server.server_address[1]
    print(f"serving on http://127.0.0.1:{actual}/", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


# ---- parser ----


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="varimap", description="Process variant modelling toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func, help_: str):
        p = sub.add_parser(name, help=help_)
        p.add_argument("project", help="project JSON file or model DSL file")
        p.set_defaults(func=func)
        return p

    add("validate", cmd_validate, "check a project or model file")

    p = add("matrix", cmd_matrix, "render the variation matrix")
    p.add_argument("--format", choices=["text", "csv", "json"], default="text")

    p = add("decide", cmd_decide, "evaluate together/separate verdicts")
    p.add_argument("--format", choices=["text", "csv", "json"], default="text")
    p.add_argument("--strict", action="store_true", help="exit 3 on unresolved analyst choices")

    p = add("map", cmd_map, "generate the variation map")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--format", choices=["dsl", "json", "dot"], default="dsl")
    p.add_argument("--dot", action="store_true", help="shorthand for --format dot")

    p = add("merge", cmd_merge, "merge one variant group's models")
    p.add_argument("--group", required=True)
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--report", help="write the merge report JSON here")

    p = add("baseline", cmd_baseline, "fragmented baseline repository with metrics")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--dup-convention", choices=list(DUP_CONVENTIONS), default="all")

    p = add("metrics", cmd_metrics, "size/duplication/complexity metrics")
    p.add_argument("--format", choices=["text", "csv", "json"], default="text")
    p.add_argument("--dup-convention", choices=list(DUP_CONVENTIONS), default="all")
    p.add_argument("--figures", help="directory for rendered charts")

    p = add("compare", cmd_compare, "consolidated vs fragmented comparison")
    p.add_argument("--format", choices=["text", "csv", "json"], default="text")
    p.add_argument("--dup-convention", choices=list(DUP_CONVENTIONS), default="all")
    p.add_argument("--figures", help="directory for rendered charts")

    p = add("serve", cmd_serve, "run the local HTTP service")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--ui-dir", help="static UI bundle directory")

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _REFERENCE_ERRORS as ex:
        print(f"error: {ex}", file=sys.stderr)
        return EXIT_REFERENCE
    except _PARSE_ERRORS as ex:
        print(f"error: {ex}", file=sys.stderr)
        return EXIT_PARSE
    except FileNotFoundError as ex:
        print(f"error: {ex}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
