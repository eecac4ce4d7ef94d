"""Local HTTP service exposing project state and what-if evaluation.

Read endpoints return the same bytes as the CLI's JSON output for the same
project state. Writes (driver ratings, similarity bands) bump a monotonic
revision and honour If-Match for optimistic concurrency. Scenario evaluation
never mutates the project.
"""

from __future__ import annotations

import json
import os
import posixpath
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .consolidation import decide_rows_for_map
from .decisions import DanglingReference, build_matrix, build_variation_map, decide_project
from .drivers import STRENGTH_QUESTIONS, StrengthRating, elicitation_catalog
from .metrics import compute_metrics
from .project import (
    ProjectFile,
    project_to_obj,
    verdict_from_obj,
    with_driver_strength,
    with_group_band,
)
from .render import decisions_obj, dumps_json, map_obj, matrix_obj, metrics_obj
from .scenario import Scenario, evaluate_scenario
from .similarity import SimilarityBand

_PLACEHOLDER_PAGE = """<!doctype html>
<html><head><meta charset="utf-8"><title>varimap</title></head>
<body><h1>varimap service</h1>
<p>No UI bundle is installed. The JSON API lives under <code>/api/</code>.</p>
</body></html>
"""

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json; charset=utf-8",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}


class ProjectState:
    """Current project plus a revision counter; one lock serialises writes."""

    def __init__(self, project: ProjectFile):
        self.project = project
        self.revision = 1
        self.lock = threading.Lock()

    def snapshot(self) -> tuple[ProjectFile, int]:
        with self.lock:
            return self.project, self.revision

    def replace(self, project: ProjectFile) -> int:
        with self.lock:
            self.project = project
            self.revision += 1
            return self.revision


class _Handler(BaseHTTPRequestHandler):
    server_version = "varimap"
    protocol_version = "HTTP/1.1"

    # injected by make_server
    state: ProjectState
    ui_dir: str | None
    quiet: bool

    def log_message(self, fmt: str, *args) -> None:
        if not self.quiet:
            super().log_message(fmt, *args)

    # -- plumbing --

    def _send(self, status: int, body: bytes, content_type: str = "application/json; charset=utf-8") -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status: int, obj) -> None:
        self._send(status, dumps_json(obj).encode("utf-8"))

    def _send_error(self, status: int, message: str, revision: int | None = None) -> None:
        obj: dict = {"error": message}
        if revision is not None:
            obj["revision"] = revision
        self._send_json(status, obj)

    def _read_body(self) -> dict | None:
        length = int(self.headers.get("Content-Length", "0"))
        raw = self.rfile.read(length) if length else b""
        try:
            obj = json.loads(raw.decode("utf-8")) if raw else {}
        except (UnicodeDecodeError, json.JSONDecodeError):
            self._send_error(400, "body is not valid JSON")
            return None
        if not isinstance(obj, dict):
            self._send_error(400, "body must be a JSON object")
            return None
        return obj

    def _check_revision(self, revision: int) -> bool:
        expected = self.headers.get("If-Match")
        if expected is not None and expected.strip('"') != str(revision):
            self._send_error(409, "stale revision", revision)
            return False
        return True

    # -- GET --

    def do_GET(self) -> None:
        path = self.path.split("?", 1)[0]
        project, revision = self.state.snapshot()
        try:
            if path == "/api/project":
                self._send_json(
                    200,
                    {
                        "revision": revision,
                        "project": project_to_obj(project),
                        "strength_questions": [
                            {"strength": rating.value, "question": question}
                            for rating, question in STRENGTH_QUESTIONS
                        ],
                        "catalog": [
                            {"class": cls.value, "round": round_no, "question": question}
                            for cls, round_no, question in elicitation_catalog()
                        ],
                    },
                )
            elif path == "/api/matrix":
                self._send(200, dumps_json(matrix_obj(build_matrix(project))).encode("utf-8"))
            elif path == "/api/decisions":
                self._send(200, dumps_json(decisions_obj(decide_project(project))).encode("utf-8"))
            elif path == "/api/map":
                rows = decide_rows_for_map(project)
                vmap = build_variation_map(project.repository.root_definition(), rows)
                self._send(200, dumps_json(map_obj(vmap, rows)).encode("utf-8"))
            elif path == "/api/metrics":
                self._send(200, dumps_json(metrics_obj(compute_metrics(project.repository))).encode("utf-8"))
            elif path.startswith("/api/"):
                self._send_error(404, f"unknown endpoint {path}")
            else:
                self._serve_static(path)
        except DanglingReference as ex:
            self._send_error(404, str(ex))
        except Exception as ex:  # surface compute errors as JSON, keep serving
            self._send_error(400, str(ex))

    def _serve_static(self, path: str) -> None:
        if self.ui_dir is None:
            if path in ("/", "/index.html"):
                self._send(200, _PLACEHOLDER_PAGE.encode("utf-8"), "text/html; charset=utf-8")
            else:
                self._send_error(404, "not found")
            return
        clean = posixpath.normpath(path.lstrip("/")) or "index.html"
        if clean in (".", ""):
            clean = "index.html"
        if clean.startswith(".."):
            self._send_error(404, "not found")
            return
        target = os.path.join(self.ui_dir, clean)
        if os.path.isdir(target):
            target = os.path.join(target, "index.html")
        if not os.path.isfile(target):
            self._send_error(404, "not found")
            return
        ext = os.path.splitext(target)[1].lower()
        with open(target, "rb") as fh:
            self._send(200, fh.read(), _CONTENT_TYPES.get(ext, "application/octet-stream"))

    # -- PUT --

    def do_PUT(self) -> None:
        path = self.path.split("?", 1)[0]
        if path.startswith("/api/ratings/"):
            self._put_rating(path[len("/api/ratings/"):])
        elif path.startswith("/api/similarity/"):
            self._put_band(path[len("/api/similarity/"):])
        else:
            self._send_error(404, f"unknown endpoint {path}")

    def _put_rating(self, driver_id: str) -> None:
        body = self._read_body()
        if body is None:
            return
        if set(body) != {"strength"}:
            self._send_error(400, 'body must be {"strength": ...}')
            return
        try:
            strength = StrengthRating(body["strength"])
        except ValueError:
            self._send_error(400, f"unknown strength {body['strength']!r}")
            return
        with self.state.lock:
            if not self._check_revision(self.state.revision):
                return
            try:
                updated = with_driver_strength(self.state.project, driver_id, strength)
            except DanglingReference as ex:
                self._send_error(404, str(ex))
                return
            self.state.project = updated
            self.state.revision += 1
            self._send_json(200, {"revision": self.state.revision})

    def _put_band(self, group_id: str) -> None:
        body = self._read_body()
        if body is None:
            return
        if set(body) != {"band"}:
            self._send_error(400, 'body must be {"band": ...}')
            return
        try:
            band = SimilarityBand(body["band"])
        except ValueError:
            self._send_error(400, f"unknown band {body['band']!r}")
            return
        with self.state.lock:
            if not self._check_revision(self.state.revision):
                return
            try:
                updated = with_group_band(self.state.project, group_id, band)
            except DanglingReference as ex:
                self._send_error(404, str(ex))
                return
            self.state.project = updated
            self.state.revision += 1
            self._send_json(200, {"revision": self.state.revision})

    # -- POST --

    def do_POST(self) -> None:
        path = self.path.split("?", 1)[0]
        if path != "/api/scenario":
            self._send_error(404, f"unknown endpoint {path}")
            return
        body = self._read_body()
        if body is None:
            return
        unknown = set(body) - {"ratings", "bands", "verdicts"}
        if unknown:
            self._send_error(400, f"unknown scenario field {sorted(unknown)[0]!r}")
            return
        try:
            scenario = Scenario(
                {k: StrengthRating(v) for k, v in body.get("ratings", {}).items()},
                {k: SimilarityBand(v) for k, v in body.get("bands", {}).items()},
                {k: verdict_from_obj(v) for k, v in body.get("verdicts", {}).items()},
            )
        except (ValueError, AttributeError) as ex:
            self._send_error(400, f"bad scenario: {ex}")
            return
        project, _ = self.state.snapshot()
        try:
            result = evaluate_scenario(project, scenario)
        except DanglingReference as ex:
            self._send_error(404, str(ex))
            return
        except Exception as ex:
            self._send_error(400, str(ex))
            return
        self._send_json(200, result)


def make_server(project: ProjectFile, port: int, ui_dir: str | None = None, quiet: bool = True) -> ThreadingHTTPServer:
    """Bound but not yet serving; callers run serve_forever (or a thread)."""
    state = ProjectState(project)
    handler = type("BoundHandler", (_Handler,), {"state": state, "ui_dir": ui_dir, "quiet": quiet})
    server = ThreadingHTTPServer(("127.0.0.1", port), handler)
    server.project_state = state  # type: ignore[attr-defined]
    return server


def resolve_port(cli_port: int) -> int:
    """VARIMAP_PORT wins over the command-line value when set."""
    env = os.environ.get("VARIMAP_PORT")
    if env:
        return int(env)
    return cli_port
