// Similarity band colour coding shared by the matrix and the legend.

import type { Band } from "../types.js";

export const BAND_ORDER: Band[] = [
  "identical",
  "very_similar",
  "similar",
  "somewhat_similar",
  "not_similar",
];

export const BAND_COLORS: Record<Band, string> = {
  identical: "#1b7f3b",
  very_similar: "#7cb342",
  similar: "#f9a825",
  somewhat_similar: "#ef6c00",
  not_similar: "#c62828",
};

export const NO_BAND_COLOR = "#9e9e9e";

export function bandColor(band: Band | null | undefined): string {
  return band ? BAND_COLORS[band] : NO_BAND_COLOR;
}

export function bandLabel(band: Band): string {
  return band.replace(/_/g, " ");
}
