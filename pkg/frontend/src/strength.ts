// Local mirror of the server's strength questionnaire so the rating wizard
// can preview a rating before anything is written. The mirrored text must
// stay identical to GET /api/project's strength_questions and catalog; a
// test pins this against a recorded response.

import type { Strength } from "./types.js";

export interface WizardQuestion {
  strength: Strength;
  question: string;
}

export const STRENGTH_QUESTIONS: WizardQuestion[] = [
  {
    strength: "very_strong",
    question:
      "Would a merger of the variants due to this driver be impossible without a " +
      "decision from the highest level of management, because it would affect the " +
      "business model or structure in a fundamental way?",
  },
  {
    strength: "strong",
    question:
      "Would a merger of the variants (if desirable) require considerable investment, " +
      "including noticeable re-organisation, and require a decision from a high level " +
      "of management?",
  },
  {
    strength: "somewhat_strong",
    question:
      "Would a merger of the variants (if desirable) require some investment, include " +
      "some re-organisation noticeable to the concerned business unit only, and require " +
      "a decision from mid-level management?",
  },
];

export interface CatalogQuestion {
  class: string;
  round: number;
  question: string;
}

export const ELICITATION_CATALOG: CatalogQuestion[] = [
  { class: "operational", round: 1, question: "Are there different ways or modes in which this process is performed (how)?" },
  { class: "product", round: 1, question: "How many products or services does the process produce (what)?" },
  { class: "market", round: 1, question: "In how many markets or locations does the process operate (where)?" },
  { class: "customer", round: 1, question: "How many different customer segments does the process serve (who)?" },
  { class: "time", round: 1, question: "Does the process run differently at particular times, seasons, or deadlines (when)?" },
  { class: "operational", round: 2, question: "For each mode of operation: which steps differ, and which systems or resources drive the difference?" },
  { class: "product", round: 2, question: "For each product or service: does its handling differ enough to call it a separate variant?" },
  { class: "market", round: 2, question: "For each market or location: which local rules or channels change how the process runs?" },
  { class: "customer", round: 2, question: "How many sub-segments of customers are served in this process, and does each get distinct treatment?" },
  { class: "time", round: 2, question: "For each timing condition: what exactly changes - steps, ordering, or responsible roles?" },
];

// First yes wins, walking strongest to weakest; all no means not_strong.
export function assessStrength(answers: [boolean, boolean, boolean]): Strength {
  if (answers[0]) return "very_strong";
  if (answers[1]) return "strong";
  if (answers[2]) return "somewhat_strong";
  return "not_strong";
}
