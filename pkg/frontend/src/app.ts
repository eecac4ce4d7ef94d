// Browser entry point: fetches the project and wires the matrix, map,
// wizard, and what-if panel together. All data flows through ApiClient;
// this file only moves strings between the API and the DOM.

import { ApiClient } from "./api.js";
import { emptyState, setBandOverride, setRatingOverride, setSnapshot } from "./state.js";
import { renderLegend, renderMatrix } from "./render/matrix.js";
import { gatewayCount, renderMap, renderProvenance } from "./render/map.js";
import { renderWhatIf, WhatIfPanel } from "./whatif.js";
import { RatingWizard } from "./wizard.js";
import type { Band, DecisionsDoc, MapDoc, MatrixDoc, Strength } from "./types.js";

const STRENGTHS: Strength[] = ["very_strong", "strong", "somewhat_strong", "not_strong"];
const BANDS: Band[] = ["identical", "very_similar", "similar", "somewhat_similar", "not_similar"];

function el(id: string): HTMLElement {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found;
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

async function main(): Promise<void> {
  const client = new ApiClient((url, init) => fetch(url, init));
  const state = emptyState();
  const panel = new WhatIfPanel(client, state);

  const project = await client.getProject();
  setSnapshot(state, project.data);

  const [matrix, decisions, map, metrics] = await Promise.all([
    client.getMatrix(),
    client.getDecisions(),
    client.getMap(),
    client.getMetrics(),
  ]);
  await panel.refreshBaseline();

  el("revision").textContent = `revision ${state.revision}`;
  renderMatrixSection(matrix.data);
  renderMapSection(map.data);
  renderDecisionControls(decisions.data, state, panel, client);
  el("metrics").textContent = metrics.raw;
  await refreshPreview(panel);
}

function renderMatrixSection(matrix: MatrixDoc): void {
  el("matrix").innerHTML = renderMatrix(matrix) + renderLegend();
}

function renderMapSection(map: MapDoc): void {
  const host = el("map");
  host.innerHTML = renderMap(map);
  const note = gatewayCount(host.innerHTML) === 0 ? "no variant gateways" : "";
  el("map-note").textContent = note;
  host.querySelectorAll("[data-group]").forEach((shape) => {
    shape.addEventListener("click", () => {
      const group = shape.getAttribute("data-group");
      const branch = map.branches.find((b) => b.group === group);
      el("provenance").innerHTML = branch ? renderProvenance(branch) : "";
    });
  });
}

function renderDecisionControls(
  decisions: DecisionsDoc,
  state: ReturnType<typeof emptyState>,
  panel: WhatIfPanel,
  client: ApiClient,
): void {
  const host = el("controls");
  const driverIds = [...new Set(decisions.rows.map((r) => r.driver))];
  const groupIds = decisions.rows.map((r) => r.group);

  const ratingRows = driverIds
    .map(
      (d) =>
        `<label>${escapeHtml(d)} <select data-rating="${escapeHtml(d)}">` +
        `<option value="">(committed)</option>` +
        STRENGTHS.map((s) => `<option value="${s}">${s}</option>`).join("") +
        `</select></label> <button data-wizard="${escapeHtml(d)}">wizard</button>`,
    )
    .join("<br>");
  const bandRows = groupIds
    .map(
      (g) =>
        `<label>${escapeHtml(g)} <select data-band="${escapeHtml(g)}">` +
        `<option value="">(committed)</option>` +
        BANDS.map((b) => `<option value="${b}">${b}</option>`).join("") +
        `</select></label>`,
    )
    .join("<br>");
  host.innerHTML =
    `<fieldset><legend>rating overrides</legend>${ratingRows}</fieldset>` +
    `<fieldset><legend>band overrides</legend>${bandRows}</fieldset>` +
    `<button id="preview">preview</button> <button id="apply">apply</button>` +
    `<div id="wizard-box"></div>`;

  host.querySelectorAll("select[data-rating]").forEach((sel) => {
    sel.addEventListener("change", () => {
      const driver = sel.getAttribute("data-rating");
      const value = (sel as HTMLSelectElement).value as Strength | "";
      if (driver && value) setRatingOverride(state, driver, value);
      if (driver && !value) state.pendingRatings.delete(driver);
    });
  });
  host.querySelectorAll("select[data-band]").forEach((sel) => {
    sel.addEventListener("change", () => {
      const group = sel.getAttribute("data-band");
      const value = (sel as HTMLSelectElement).value as Band | "";
      if (group && value) setBandOverride(state, group, value);
      if (group && !value) state.pendingBands.delete(group);
    });
  });
  host.querySelectorAll("button[data-wizard]").forEach((btn) => {
    btn.addEventListener("click", () => runWizard(btn.getAttribute("data-wizard") ?? "", client, state));
  });

  el("preview").addEventListener("click", () => void refreshPreview(panel));
  el("apply").addEventListener("click", () => {
    void panel.apply().then(async () => {
      el("revision").textContent = `revision ${state.revision}`;
      const [matrix, decisions2, map2, metrics2] = await Promise.all([
        client.getMatrix(),
        client.getDecisions(),
        client.getMap(),
        client.getMetrics(),
      ]);
      renderMatrixSection(matrix.data);
      renderMapSection(map2.data);
      renderDecisionControls(decisions2.data, state, panel, client);
      el("metrics").textContent = metrics2.raw;
      await refreshPreview(panel);
    });
  });
}

async function refreshPreview(panel: WhatIfPanel): Promise<void> {
  const view = await panel.preview();
  el("whatif").innerHTML = renderWhatIf(view);
}

function runWizard(driverId: string, client: ApiClient, state: ReturnType<typeof emptyState>): void {
  const wizard = new RatingWizard(client, state, driverId);
  wizard.start();
  const box = el("wizard-box");
  const ask = (): void => {
    if (wizard.finished()) {
      box.innerHTML =
        `<p>${escapeHtml(driverId)}: ${wizard.previewStrength()}</p>` +
        `<button id="wz-commit">commit</button> <button id="wz-cancel">cancel</button>`;
      el("wz-commit").addEventListener("click", () => {
        void wizard.commit().then((result) => {
          if (result.conflictRevision !== null) {
            box.innerHTML =
              `<p>conflict: server is at revision ${result.conflictRevision}</p>` +
              `<button id="wz-retry">retry</button> <button id="wz-cancel">cancel</button>`;
            el("wz-retry").addEventListener("click", () => {
              void wizard.retryAt(result.conflictRevision ?? 0).then(() => location.reload());
            });
            el("wz-cancel").addEventListener("click", () => {
              wizard.cancel();
              box.innerHTML = "";
            });
            return;
          }
          location.reload();
        });
      });
      el("wz-cancel").addEventListener("click", () => {
        wizard.cancel();
        box.innerHTML = "";
      });
      return;
    }
    box.innerHTML =
      `<p>${escapeHtml(wizard.currentQuestion())}</p>` +
      `<button id="wz-yes">yes</button> <button id="wz-no">no</button> ` +
      `<button id="wz-cancel">cancel</button>`;
    el("wz-yes").addEventListener("click", () => {
      wizard.answer(true);
      ask();
    });
    el("wz-no").addEventListener("click", () => {
      wizard.answer(false);
      ask();
    });
    el("wz-cancel").addEventListener("click", () => {
      wizard.cancel();
      box.innerHTML = "";
    });
  };
  ask();
}

void main().catch((err) => {
  document.body.insertAdjacentHTML("beforeend", `<pre class="error">${String(err)}</pre>`);
});
