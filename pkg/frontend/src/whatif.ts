// What-if panel: preview pending overrides through POST /api/scenario and,
// on explicit apply, promote them to persistent PUTs. Every number and
// verdict shown comes verbatim out of an API response; the only client-side
// operation is an equality check against the committed baseline to flag
// which rows changed.

import { ApiClient, StaleRevisionError } from "./api.js";
import { clearOverrides, setSnapshot, toScenarioRequest, type UiState } from "./state.js";
import type { DecisionRowObj, ScenarioDoc, ScenarioRequest } from "./types.js";

export interface VerdictChip {
  group: string;
  effective: string;
  rule: string;
  band: string | null;
  source: string;
  changed: boolean;
}

export interface WhatIfView {
  chips: VerdictChip[];
  deltas: {
    activity_nodes: string;
    subprocess_models: string;
    duplication_rate: string;
    cnc: string;
  };
  branchCount: number;
  changedGroups: string[];
}

function rowKey(row: DecisionRowObj): string {
  return JSON.stringify(row);
}

export class WhatIfPanel {
  lastRequest: ScenarioRequest | null = null;
  lastResponseText: string | null = null;
  lastScenario: ScenarioDoc | null = null;
  baselineText: string | null = null;
  baseline: ScenarioDoc | null = null;

  constructor(
    private readonly client: ApiClient,
    private readonly state: UiState,
  ) {}

  // The committed project's own preview (empty overrides); rows that differ
  // from it are flagged as changed.
  async refreshBaseline(): Promise<void> {
    const res = await this.client.postScenario({});
    this.baselineText = res.raw;
    this.baseline = res.data;
  }

  async preview(): Promise<WhatIfView> {
    const request = toScenarioRequest(this.state);
    const res = await this.client.postScenario(request);
    this.lastRequest = request;
    this.lastResponseText = res.raw;
    this.lastScenario = res.data;
    return this.view();
  }

  view(): WhatIfView {
    const scenario = this.lastScenario;
    if (!scenario) throw new Error("no preview yet");
    const baselineRows = new Map<string, string>();
    for (const row of this.baseline?.verdicts.rows ?? []) {
      baselineRows.set(row.group, rowKey(row));
    }
    const chips = scenario.verdicts.rows.map((row) => ({
      group: row.group,
      effective: row.effective,
      rule: row.rule,
      band: row.band,
      source: row.source,
      changed: baselineRows.get(row.group) !== rowKey(row),
    }));
    return {
      chips,
      deltas: { ...scenario.metrics.deltas.rendered },
      branchCount: scenario.map.branches.length,
      changedGroups: chips.filter((c) => c.changed).map((c) => c.group),
    };
  }

  // Promote pending rating/band overrides to PUTs. Verdict overrides have
  // no write endpoint; they stay preview-only and must be resolved as
  // decision overrides in the project file.
  async apply(): Promise<number> {
    if (this.state.pendingVerdicts.size) {
      throw new Error("verdict overrides are preview-only and cannot be committed");
    }
    let revision = this.state.revision;
    const ratings = [...this.state.pendingRatings.entries()].sort((a, b) =>
      a[0] < b[0] ? -1 : 1,
    );
    const bands = [...this.state.pendingBands.entries()].sort((a, b) => (a[0] < b[0] ? -1 : 1));
    for (const [driverId, strength] of ratings) {
      revision = await this.commitWrite((r) => this.client.putRating(driverId, strength, r), revision);
    }
    for (const [groupId, band] of bands) {
      revision = await this.commitWrite((r) => this.client.putBand(groupId, band, r), revision);
    }
    const project = await this.client.getProject();
    setSnapshot(this.state, project.data);
    clearOverrides(this.state);
    await this.refreshBaseline();
    return this.state.revision;
  }

  private async commitWrite(
    write: (revision: number) => Promise<number>,
    revision: number,
  ): Promise<number> {
    try {
      return await write(revision);
    } catch (err) {
      if (err instanceof StaleRevisionError) {
        // Someone else wrote in between; retry once against their revision.
        return await write(err.serverRevision);
      }
      throw err;
    }
  }
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderWhatIf(view: WhatIfView): string {
  const chips = view.chips
    .map(
      (c) =>
        `<span class="chip verdict-${c.effective}${c.changed ? " changed" : ""}" ` +
        `data-group="${escapeHtml(c.group)}">${escapeHtml(c.group)}: ${c.effective}` +
        ` <small>${escapeHtml(c.rule)}</small></span>`,
    )
    .join("");
  const deltas =
    `<dl class="deltas">` +
    `<dt>activity nodes</dt><dd>${escapeHtml(view.deltas.activity_nodes)}</dd>` +
    `<dt>sub-process models</dt><dd>${escapeHtml(view.deltas.subprocess_models)}</dd>` +
    `<dt>duplication rate</dt><dd>${escapeHtml(view.deltas.duplication_rate)}</dd>` +
    `<dt>cnc</dt><dd>${escapeHtml(view.deltas.cnc)}</dd>` +
    `</dl>`;
  return `<div class="whatif"><div class="chips">${chips}</div>${deltas}` +
    `<p class="branches">map branches: ${view.branchCount}</p></div>`;
}
