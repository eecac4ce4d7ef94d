// What-if consistency against recorded service responses. For each scripted
// override set the fixture holds the exact bytes the live service produced
// for the scenario preview and for the reads made after committing the same
// overrides. The panel must display the preview bytes untouched, and the
// post-commit documents must reproduce the preview.

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { emptyState, hasPendingOverrides, setBandOverride, setRatingOverride, setVerdictOverride } from "../src/state.js";
import type { Band, ScenarioDoc, ScenarioRequest, Strength } from "../src/types.js";
import { renderWhatIf, WhatIfPanel } from "../src/whatif.js";
import { fakeFetch, loadGlobals, loadSets, route, type RecordedSet, type Route } from "./helpers.js";

const sets = loadSets();
const globals = loadGlobals();
const emptySet = sets.find((s) => s.name === "empty")!;

function stateWithOverrides(set: RecordedSet) {
  const state = emptyState();
  state.revision = 1;
  for (const [driverId, strength] of Object.entries(set.overrides.ratings)) {
    setRatingOverride(state, driverId, strength as Strength);
  }
  for (const [groupId, band] of Object.entries(set.overrides.bands)) {
    setBandOverride(state, groupId, band as Band);
  }
  return state;
}

function expectedRequest(set: RecordedSet): ScenarioRequest {
  const request: ScenarioRequest = {};
  if (Object.keys(set.overrides.ratings).length) {
    request.ratings = set.overrides.ratings as Record<string, Strength>;
  }
  if (Object.keys(set.overrides.bands).length) {
    request.bands = set.overrides.bands as Record<string, Band>;
  }
  return request;
}

// Serves the recorded empty-override preview for a {} body and the set's
// recorded preview for anything else; bodies are asserted separately.
function scenarioRoute(set: RecordedSet): Route {
  return (call) => {
    if (call.method !== "POST" || call.url !== "/api/scenario") return undefined;
    return { status: 200, body: call.body === "{}" ? emptySet.scenario : set.scenario };
  };
}

describe("what-if previews match the recorded scenario responses", () => {
  it("covers twenty scripted override sets", () => {
    expect(sets).toHaveLength(20);
    expect(new Set(sets.map((s) => s.name)).size).toBe(20);
  });

  for (const set of sets) {
    it(`set ${set.name}`, async () => {
      const { fetchFn, calls } = fakeFetch([scenarioRoute(set)]);
      const state = stateWithOverrides(set);
      const panel = new WhatIfPanel(new ApiClient(fetchFn), state);
      await panel.refreshBaseline();
      const view = await panel.preview();

      // The preview posts exactly the pending overrides, nothing else.
      const scenarioCalls = calls.filter((c) => c.url === "/api/scenario");
      expect(scenarioCalls).toHaveLength(2);
      expect(JSON.parse(scenarioCalls[1]!.body ?? "null")).toEqual(expectedRequest(set));

      // Displayed bytes are the server's bytes, not a re-serialization.
      expect(panel.lastResponseText).toBe(set.scenario);

      const parsed = JSON.parse(set.scenario) as ScenarioDoc;

      // Verdict chips carry the response rows verbatim.
      expect(view.chips).toHaveLength(parsed.verdicts.rows.length);
      view.chips.forEach((chip, i) => {
        const row = parsed.verdicts.rows[i]!;
        expect(chip.group).toBe(row.group);
        expect(chip.effective).toBe(row.effective);
        expect(chip.rule).toBe(row.rule);
        expect(chip.band).toBe(row.band);
        expect(chip.source).toBe(row.source);
      });

      // Metric deltas and the branch count come straight from the response.
      expect(view.deltas).toEqual(parsed.metrics.deltas.rendered);
      expect(view.branchCount).toBe(parsed.map.branches.length);

      // The rendered panel shows those same strings.
      const html = renderWhatIf(view);
      for (const rendered of Object.values(parsed.metrics.deltas.rendered)) {
        expect(html).toContain(`<dd>${rendered}</dd>`);
      }
      expect(html).toContain(`map branches: ${parsed.map.branches.length}`);
      for (const row of parsed.verdicts.rows) {
        expect(html).toContain(`verdict-${row.effective}`);
      }

      if (set.name === "empty") {
        expect(view.changedGroups).toEqual([]);
      }

      // Committing the same overrides and refetching reproduces the preview.
      expect(JSON.parse(set.decisions_after).rows).toEqual(parsed.verdicts.rows);
      expect(JSON.parse(set.map_after)).toEqual(parsed.map);
      expect(JSON.parse(set.scenario_empty_after).metrics).toEqual(parsed.metrics);
      expect(JSON.parse(set.scenario_empty_after)).toEqual(parsed);
    });
  }

  it("flags exactly the rows that differ from the committed baseline", async () => {
    const set = sets.find((s) => s.name === "customer-very-strong")!;
    const { fetchFn } = fakeFetch([scenarioRoute(set)]);
    const panel = new WhatIfPanel(new ApiClient(fetchFn), stateWithOverrides(set));
    await panel.refreshBaseline();
    const view = await panel.preview();

    const baselineRows = new Map(
      (JSON.parse(emptySet.scenario) as ScenarioDoc).verdicts.rows.map((r) => [r.group, r]),
    );
    const parsedRows = (JSON.parse(set.scenario) as ScenarioDoc).verdicts.rows;
    const expectChanged = parsedRows
      .filter((r) => JSON.stringify(baselineRows.get(r.group)) !== JSON.stringify(r))
      .map((r) => r.group);
    expect(view.changedGroups).toEqual(expectChanged);
    expect(expectChanged.length).toBeGreaterThan(0);
  });
});

describe("applying pending overrides", () => {
  it("commits sorted ratings then bands and lands on the recorded revision", async () => {
    const set = sets.find((s) => s.name === "swap-strengths")!;
    const committedProject = JSON.parse(globals.project);
    committedProject.revision = set.revision_after;
    const { fetchFn, calls } = fakeFetch([
      route("PUT", "/api/ratings/customer", 200, '{"revision": 2}'),
      route("PUT", "/api/ratings/product", 200, '{"revision": 3}'),
      route("GET", "/api/project", 200, JSON.stringify(committedProject)),
      (call) =>
        call.method === "POST" && call.url === "/api/scenario"
          ? { status: 200, body: set.scenario_empty_after }
          : undefined,
    ]);
    const state = stateWithOverrides(set);
    const panel = new WhatIfPanel(new ApiClient(fetchFn), state);

    const revision = await panel.apply();

    expect(revision).toBe(set.revision_after);
    expect(state.revision).toBe(set.revision_after);
    expect(hasPendingOverrides(state)).toBe(false);

    const puts = calls.filter((c) => c.method === "PUT");
    expect(puts.map((c) => c.url)).toEqual(["/api/ratings/customer", "/api/ratings/product"]);
    expect(puts.map((c) => c.headers["If-Match"])).toEqual(["1", "2"]);
    expect(puts[0]!.body).toBe('{"strength":"very_strong"}');
    expect(puts[1]!.body).toBe('{"strength":"not_strong"}');

    // The refreshed baseline is the committed project's own empty preview,
    // which equals the pre-commit preview of the same overrides.
    expect(panel.baselineText).toBe(set.scenario_empty_after);
    expect(JSON.parse(set.scenario_empty_after)).toEqual(JSON.parse(set.scenario));
  });

  it("retries a stale write once at the revision the server reports", async () => {
    const set = sets.find((s) => s.name === "customer-strong")!;
    let putCount = 0;
    const { fetchFn, calls } = fakeFetch([
      (call) => {
        if (call.method !== "PUT" || call.url !== "/api/ratings/customer") return undefined;
        putCount += 1;
        return putCount === 1
          ? { status: 409, body: '{"error": "stale revision", "revision": 7}' }
          : { status: 200, body: '{"revision": 8}' };
      },
      route("GET", "/api/project", 200, globals.project),
      (call) =>
        call.method === "POST" && call.url === "/api/scenario"
          ? { status: 200, body: emptySet.scenario }
          : undefined,
    ]);
    const panel = new WhatIfPanel(new ApiClient(fetchFn), stateWithOverrides(set));

    await panel.apply();

    const puts = calls.filter((c) => c.method === "PUT");
    expect(puts.map((c) => c.headers["If-Match"])).toEqual(["1", "7"]);
  });

  it("refuses to commit verdict overrides, which stay preview-only", async () => {
    const { fetchFn, calls } = fakeFetch([
      (call) =>
        call.method === "POST" && call.url === "/api/scenario"
          ? { status: 200, body: emptySet.scenario }
          : undefined,
    ]);
    const state = emptyState();
    state.revision = 1;
    setVerdictOverride(state, "sub_confirm:product", { kind: "together" });
    const panel = new WhatIfPanel(new ApiClient(fetchFn), state);

    await panel.preview();
    expect(JSON.parse(calls[0]!.body ?? "null")).toEqual({
      verdicts: { "sub_confirm:product": { kind: "together" } },
    });

    await expect(panel.apply()).rejects.toThrow("preview-only");
    expect(calls.filter((c) => c.method === "PUT")).toHaveLength(0);
  });
});
