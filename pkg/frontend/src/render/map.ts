// Variation map renderer: the server ships the map's structure (nodes,
// flows, branch provenance) and the client only does layout. Gateways are
// drawn as diamonds; a gateway that opens a variant branch carries the
// group id so the app can pop up the decision provenance next to it.

import type { DefinitionObj, MapBranch, MapDoc, NodeObj } from "../types.js";

const NODE_W = 132;
const NODE_H = 44;
const X_GAP = 180;
const Y_GAP = 78;
const MARGIN = 40;

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

// Longest-path layering; the definition is acyclic by construction.
function layerNodes(def: DefinitionObj): Map<string, number> {
  const layer = new Map<string, number>();
  const incoming = new Map<string, string[]>();
  for (const n of def.nodes) incoming.set(n.id, []);
  for (const f of def.flows) incoming.get(f.target)?.push(f.source);

  const resolve = (id: string, seen: Set<string>): number => {
    const known = layer.get(id);
    if (known !== undefined) return known;
    if (seen.has(id)) return 0;
    seen.add(id);
    const preds = incoming.get(id) ?? [];
    const depth = preds.length ? Math.max(...preds.map((p) => resolve(p, seen))) + 1 : 0;
    layer.set(id, depth);
    return depth;
  };
  for (const n of def.nodes) resolve(n.id, new Set());
  return layer;
}

interface Placed {
  node: NodeObj;
  x: number;
  y: number;
}

function placeNodes(def: DefinitionObj): Map<string, Placed> {
  const layers = layerNodes(def);
  const byLayer = new Map<number, NodeObj[]>();
  for (const node of def.nodes) {
    const l = layers.get(node.id) ?? 0;
    const bucket = byLayer.get(l);
    if (bucket) bucket.push(node);
    else byLayer.set(l, [node]);
  }
  const placed = new Map<string, Placed>();
  for (const [l, nodes] of byLayer) {
    nodes.sort((a, b) => (a.id < b.id ? -1 : 1));
    nodes.forEach((node, i) => {
      placed.set(node.id, {
        node,
        x: MARGIN + l * X_GAP,
        y: MARGIN + i * Y_GAP,
      });
    });
  }
  return placed;
}

function isGateway(kind: string): boolean {
  return kind === "xor_split" || kind === "xor_join" || kind === "and_split" || kind === "and_join";
}

function nodeShape(p: Placed, branchByName: Map<string, MapBranch>): string {
  const { node, x, y } = p;
  const cx = x + NODE_W / 2;
  const cy = y + NODE_H / 2;
  const label = node.label ?? "";
  if (node.kind === "start_event" || node.kind === "end_event") {
    const r = node.kind === "start_event" ? 14 : 16;
    const cls = node.kind === "start_event" ? "start" : "end";
    return `<circle class="${cls}" cx="${cx}" cy="${cy}" r="${r}"/>`;
  }
  if (isGateway(node.kind)) {
    const half = 24;
    const points = `${cx},${cy - half} ${cx + half},${cy} ${cx},${cy + half} ${cx - half},${cy}`;
    const branch = branchByName.get(node.id);
    const group = branch ? ` data-group="${escapeXml(branch.group)}"` : "";
    const mark = node.kind.startsWith("and")
      ? `<text class="gateway-mark" x="${cx}" y="${cy + 5}" text-anchor="middle">+</text>`
      : `<text class="gateway-mark" x="${cx}" y="${cy + 5}" text-anchor="middle">x</text>`;
    return `<polygon class="gateway ${node.kind}"${group} points="${points}"/>${mark}`;
  }
  const cls = node.kind === "sub_process_call" ? "call" : "task";
  const text = `<text x="${cx}" y="${cy + 4}" text-anchor="middle">${escapeXml(label)}</text>`;
  const rect = `<rect class="${cls}" x="${x}" y="${y}" width="${NODE_W}" height="${NODE_H}" rx="6"/>`;
  const inner =
    node.kind === "sub_process_call"
      ? `<rect class="call-inner" x="${x + 4}" y="${y + 4}" width="${NODE_W - 8}" height="${NODE_H - 8}" rx="4"/>`
      : "";
  return rect + inner + text;
}

function anchor(p: Placed): { x: number; y: number } {
  return { x: p.x + NODE_W / 2, y: p.y + NODE_H / 2 };
}

export function renderMap(doc: MapDoc): string {
  const placed = placeNodes(doc.definition);
  const branchBySplit = new Map<string, MapBranch>();
  for (const b of doc.branches) branchBySplit.set(b.split_node, b);

  let maxX = 0;
  let maxY = 0;
  for (const p of placed.values()) {
    maxX = Math.max(maxX, p.x + NODE_W);
    maxY = Math.max(maxY, p.y + NODE_H);
  }

  const edges = doc.definition.flows
    .map((f) => {
      const s = placed.get(f.source);
      const t = placed.get(f.target);
      if (!s || !t) return "";
      const a = anchor(s);
      const b = anchor(t);
      const label = f.when?.length
        ? `<text class="flow-label" x="${(a.x + b.x) / 2}" y="${(a.y + b.y) / 2 - 6}" ` +
          `text-anchor="middle">${escapeXml(f.when.join(", "))}</text>`
        : "";
      return `<line class="flow" x1="${a.x}" y1="${a.y}" x2="${b.x}" y2="${b.y}" marker-end="url(#arrow)"/>${label}`;
    })
    .join("");

  const nodes = [...placed.values()]
    .sort((a, b) => (a.node.id < b.node.id ? -1 : 1))
    .map((p) => nodeShape(p, branchBySplit))
    .join("");

  const defs =
    '<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="7" ' +
    'markerHeight="7" orient="auto-start-reverse"><path d="M 0 0 L 10 5 L 0 10 z"/></marker></defs>';

  return (
    `<svg class="map" xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${maxX + MARGIN} ${maxY + MARGIN}">` +
    defs +
    edges +
    nodes +
    "</svg>"
  );
}

export function gatewayCount(svg: string): number {
  return (svg.match(/class="gateway /g) ?? []).length;
}

// Decision provenance shown when a branch gateway is clicked: which group
// splits here, which variants it holds, and exactly why the verdict fell
// the way it did (strength, band, level, rule).
export function renderProvenance(branch: MapBranch): string {
  const rows = [
    ["group", branch.group],
    ["sub-process", branch.subprocess],
    ["variants", branch.variants.join(", ")],
    ["verdict", branch.effective ?? ""],
    ["rule", branch.rule ?? ""],
    ["strength", branch.strength ?? ""],
    ["band", branch.band ?? ""],
    ["level", branch.level !== undefined ? String(branch.level) : ""],
  ];
  const body = rows
    .map(([k, v]) => `<tr><th>${escapeXml(k ?? "")}</th><td>${escapeXml(v ?? "")}</td></tr>`)
    .join("");
  return `<table class="provenance">${body}</table>`;
}
