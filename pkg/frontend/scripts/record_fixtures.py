#!/usr/bin/env python3
"""Record API fixtures for the UI test suite.

Boots the real varimap service against the banking sample project and, for
each scripted override set, records the exact bytes of the scenario preview
and of the reads made after committing the same overrides. Tests then assert
that what the UI displays equals these bytes with no re-serialization.

Run from frontend/:  python3 scripts/record_fixtures.py
"""

from __future__ import annotations

import json
import os
import socket
import subprocess
import sys
import tempfile
import time
import urllib.error
import urllib.request
from pathlib import Path

FRONTEND = Path(__file__).resolve().parent.parent
REPO = FRONTEND.parent
PROJECT = REPO / "tests" / "fixtures" / "banking.vproj.json"
OUT = FRONTEND / "tests" / "fixtures"

# Scripted override sets: every set commits cleanly over ratings and bands.
OVERRIDE_SETS: list[dict] = [
    {"name": "empty", "ratings": {}, "bands": {}},
    {"name": "customer-very-strong", "ratings": {"customer": "very_strong"}, "bands": {}},
    {"name": "customer-strong", "ratings": {"customer": "strong"}, "bands": {}},
    {"name": "customer-not-strong", "ratings": {"customer": "not_strong"}, "bands": {}},
    {"name": "product-somewhat-strong", "ratings": {"product": "somewhat_strong"}, "bands": {}},
    {"name": "product-not-strong", "ratings": {"product": "not_strong"}, "bands": {}},
    {"name": "settle-identical", "ratings": {}, "bands": {"sub_settle:product": "identical"}},
    {"name": "confirm-identical", "ratings": {}, "bands": {"sub_confirm:product": "identical"}},
    {"name": "register-not-similar", "ratings": {}, "bands": {"sub_register:customer": "not_similar"}},
    {"name": "match-very-similar", "ratings": {}, "bands": {"sub_match:customer": "very_similar"}},
    {"name": "settle-very-similar", "ratings": {}, "bands": {"sub_settle:product": "very_similar"}},
    {"name": "swap-strengths", "ratings": {"customer": "very_strong", "product": "not_strong"}, "bands": {}},
    {"name": "product-strong-confirm-very-similar", "ratings": {"product": "strong"}, "bands": {"sub_confirm:product": "very_similar"}},
    {"name": "customer-strong-register-similar", "ratings": {"customer": "strong"}, "bands": {"sub_register:customer": "similar"}},
    {"name": "both-product-groups-identical", "ratings": {}, "bands": {"sub_confirm:product": "identical", "sub_settle:product": "identical"}},
    {"name": "product-not-strong-match-somewhat", "ratings": {"product": "not_strong"}, "bands": {"sub_match:customer": "somewhat_similar"}},
    {"name": "customer-same-value", "ratings": {"customer": "somewhat_strong"}, "bands": {}},
    {"name": "mixed-three", "ratings": {"customer": "not_strong", "product": "somewhat_strong"}, "bands": {"sub_register:customer": "very_similar"}},
    {"name": "register-match-identical", "ratings": {}, "bands": {"sub_register:customer": "identical", "sub_match:customer": "identical"}},
    {"name": "committed-values", "ratings": {"product": "very_strong"}, "bands": {"sub_settle:product": "somewhat_similar"}},
]


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


class Server:
    def __init__(self, project_path: Path):
        self.port = free_port()
        env = dict(os.environ, VARIMAP_PORT=str(self.port))
        self.proc = subprocess.Popen(
            ["varimap", "serve", str(project_path)],
            env=env,
            stdout=subprocess.DEVNULL,
            stderr=subprocess.DEVNULL,
        )
        deadline = time.time() + 10
        while True:
            try:
                self.get("/api/project")
                return
            except (urllib.error.URLError, ConnectionError):
                if time.time() > deadline:
                    self.stop()
                    raise RuntimeError("service did not come up")
                time.sleep(0.05)

    def request(self, method: str, path: str, body: dict | None = None, headers: dict | None = None) -> tuple[int, bytes]:
        req = urllib.request.Request(
            f"http://127.0.0.1:{self.port}{path}",
            method=method,
            data=None if body is None else json.dumps(body).encode("utf-8"),
            headers=headers or {},
        )
        try:
            with urllib.request.urlopen(req) as resp:
                return resp.status, resp.read()
        except urllib.error.HTTPError as err:
            return err.code, err.read()

    def get(self, path: str) -> str:
        status, data = self.request("GET", path)
        if status != 200:
            raise RuntimeError(f"GET {path} -> {status}: {data[:200]!r}")
        return data.decode("utf-8")

    def post(self, path: str, body: dict) -> str:
        status, data = self.request("POST", path, body)
        if status != 200:
            raise RuntimeError(f"POST {path} -> {status}: {data[:200]!r}")
        return data.decode("utf-8")

    def put(self, path: str, body: dict, revision: int) -> int:
        status, data = self.request("PUT", path, body, {"If-Match": str(revision)})
        if status != 200:
            raise RuntimeError(f"PUT {path} @ {revision} -> {status}: {data[:200]!r}")
        return json.loads(data)["revision"]

    def stop(self) -> None:
        self.proc.terminate()
        self.proc.wait(timeout=5)


def scenario_body(overrides: dict) -> dict:
    body: dict = {}
    if overrides["ratings"]:
        body["ratings"] = overrides["ratings"]
    if overrides["bands"]:
        body["bands"] = overrides["bands"]
    return body


def record_set(overrides: dict) -> dict:
    server = Server(PROJECT)
    try:
        scenario_raw = server.post("/api/scenario", scenario_body(overrides))
        revision = json.loads(server.get("/api/project"))["revision"]
        for driver_id in sorted(overrides["ratings"]):
            revision = server.put(
                f"/api/ratings/{driver_id}", {"strength": overrides["ratings"][driver_id]}, revision
            )
        for group_id in sorted(overrides["bands"]):
            revision = server.put(
                f"/api/similarity/{group_id}", {"band": overrides["bands"][group_id]}, revision
            )
        return {
            "name": overrides["name"],
            "overrides": {"ratings": overrides["ratings"], "bands": overrides["bands"]},
            "scenario": scenario_raw,
            "decisions_after": server.get("/api/decisions"),
            "map_after": server.get("/api/map"),
            "metrics_after": server.get("/api/metrics"),
            "scenario_empty_after": server.post("/api/scenario", {}),
            "revision_after": revision,
        }
    finally:
        server.stop()


def make_empty_project(path: Path) -> None:
    sys.path.insert(0, str(REPO / "src"))
    from varimap.drivers import DriverClass, StrengthRating, VariationDriver
    from varimap.model import NodeKind, ProcessDefinition, ProcessNode, ProcessRepository, SequenceFlow
    from varimap.project import ProjectFile, save_project

    root = ProcessDefinition(
        "solo",
        "Solo process",
        2,
        (
            ProcessNode("s", NodeKind.START_EVENT),
            ProcessNode("t", NodeKind.TASK, "Only step"),
            ProcessNode("e", NodeKind.END_EVENT),
        ),
        (SequenceFlow("s", "t"), SequenceFlow("t", "e")),
    )
    project = ProjectFile(
        repository=ProcessRepository((root,), "solo"),
        drivers=(
            VariationDriver("ops", "Operating mode", DriverClass.OPERATIONAL, ("manual",), StrengthRating.STRONG),
        ),
    )
    path.write_bytes(save_project(project))


def record_globals() -> dict:
    out: dict = {}
    server = Server(PROJECT)
    try:
        out["project"] = server.get("/api/project")
        out["matrix"] = server.get("/api/matrix")
        out["decisions"] = server.get("/api/decisions")
        out["map"] = server.get("/api/map")
        out["metrics"] = server.get("/api/metrics")
        # One committed band flip drops one gateway from the map; a second
        # drops the other, leaving a gateway-free chain.
        revision = server.put("/api/similarity/sub_settle:product", {"band": "identical"}, 1)
        out["map_one"] = server.get("/api/map")
        server.put("/api/similarity/sub_confirm:product", {"band": "identical"}, revision)
        out["map_none"] = server.get("/api/map")
    finally:
        server.stop()

    with tempfile.TemporaryDirectory() as tmp:
        empty_path = Path(tmp) / "empty.vproj.json"
        make_empty_project(empty_path)
        server = Server(empty_path)
        try:
            out["matrix_empty"] = server.get("/api/matrix")
            out["map_empty"] = server.get("/api/map")
        finally:
            server.stop()
    return out


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    sets = [record_set(overrides) for overrides in OVERRIDE_SETS]
    (OUT / "sets.json").write_text(json.dumps(sets, indent=2) + "\n", encoding="utf-8")
    (OUT / "globals.json").write_text(
        json.dumps(record_globals(), indent=2) + "\n", encoding="utf-8"
    )
    print(f"recorded {len(sets)} override sets and globals into {OUT}")


if __name__ == "__main__":
    main()
