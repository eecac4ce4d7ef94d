// Rating wizard: three yes/no questions per driver, strongest first. The
// answers preview a strength locally (mirroring the server's rule) and the
// preview is written back only on an explicit commit. A stale-revision
// conflict is surfaced to the caller so the analyst chooses whether to
// retry on top of the newer state.

import { ApiClient, StaleRevisionError } from "./api.js";
import { setSnapshot, type UiState } from "./state.js";
import { assessStrength, STRENGTH_QUESTIONS } from "./strength.js";
import type { Strength } from "./types.js";

export interface WizardResult {
  committed: boolean;
  strength: Strength | null;
  conflictRevision: number | null;
}

export class RatingWizard {
  private answers: [boolean, boolean, boolean] = [false, false, false];
  private step = 0;
  open = false;

  constructor(
    private readonly client: ApiClient,
    private readonly state: UiState,
    public readonly driverId: string,
  ) {}

  start(): void {
    this.answers = [false, false, false];
    this.step = 0;
    this.open = true;
  }

  currentQuestion(): string {
    const entry = STRENGTH_QUESTIONS[Math.min(this.step, STRENGTH_QUESTIONS.length - 1)];
    return entry ? entry.question : "";
  }

  // A yes ends the questionnaire early: later questions cannot change the
  // outcome once a stronger rating applies.
  answer(yes: boolean): void {
    if (!this.open) throw new Error("wizard not started");
    if (this.step < this.answers.length) this.answers[this.step] = yes;
    this.step = yes ? this.answers.length : this.step + 1;
  }

  finished(): boolean {
    return this.step >= this.answers.length;
  }

  previewStrength(): Strength {
    return assessStrength(this.answers);
  }

  cancel(): void {
    this.open = false;
    this.answers = [false, false, false];
    this.step = 0;
  }

  async commit(): Promise<WizardResult> {
    if (!this.open) throw new Error("wizard not started");
    const strength = this.previewStrength();
    try {
      const revision = await this.client.putRating(this.driverId, strength, this.state.revision);
      this.state.revision = revision;
      const project = await this.client.getProject();
      setSnapshot(this.state, project.data);
      this.open = false;
      return { committed: true, strength, conflictRevision: null };
    } catch (err) {
      if (err instanceof StaleRevisionError) {
        return { committed: false, strength, conflictRevision: err.serverRevision };
      }
      throw err;
    }
  }

  // Retry after a surfaced conflict: adopt the server's revision first.
  async retryAt(revision: number): Promise<WizardResult> {
    this.state.revision = revision;
    return this.commit();
  }
}
