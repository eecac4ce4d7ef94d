// Client-side state: the committed project snapshot plus pending what-if
// overrides. Pending overrides are never written to the server here; only
// an explicit apply (see whatif.ts) promotes them to PUTs.

import type { Band, ProjectDoc, ScenarioRequest, Strength, VerdictObj } from "./types.js";

export interface UiState {
  snapshot: ProjectDoc | null;
  revision: number;
  pendingRatings: Map<string, Strength>;
  pendingBands: Map<string, Band>;
  pendingVerdicts: Map<string, VerdictObj>;
  focusSubprocess: string | null;
}

export function emptyState(): UiState {
  return {
    snapshot: null,
    revision: 0,
    pendingRatings: new Map(),
    pendingBands: new Map(),
    pendingVerdicts: new Map(),
    focusSubprocess: null,
  };
}

export function setSnapshot(state: UiState, snapshot: ProjectDoc): void {
  state.snapshot = snapshot;
  state.revision = snapshot.revision;
}

export function setRatingOverride(state: UiState, driverId: string, strength: Strength): void {
  state.pendingRatings.set(driverId, strength);
}

export function setBandOverride(state: UiState, groupId: string, band: Band): void {
  state.pendingBands.set(groupId, band);
}

export function setVerdictOverride(state: UiState, groupId: string, verdict: VerdictObj): void {
  state.pendingVerdicts.set(groupId, verdict);
}

export function clearOverrides(state: UiState): void {
  state.pendingRatings.clear();
  state.pendingBands.clear();
  state.pendingVerdicts.clear();
}

export function hasPendingOverrides(state: UiState): boolean {
  return (
    state.pendingRatings.size > 0 ||
    state.pendingBands.size > 0 ||
    state.pendingVerdicts.size > 0
  );
}

// The scenario body sent to POST /api/scenario: only the override kinds
// that are actually pending appear as keys.
export function toScenarioRequest(state: UiState): ScenarioRequest {
  const request: ScenarioRequest = {};
  if (state.pendingRatings.size) request.ratings = Object.fromEntries(state.pendingRatings);
  if (state.pendingBands.size) request.bands = Object.fromEntries(state.pendingBands);
  if (state.pendingVerdicts.size) request.verdicts = Object.fromEntries(state.pendingVerdicts);
  return request;
}
