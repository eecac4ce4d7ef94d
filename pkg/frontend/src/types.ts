// Shapes of the JSON documents served by the varimap HTTP API. The UI never
// derives verdicts or metrics on its own; these types describe what the
// server sends and the renderers display.

export type Strength = "very_strong" | "strong" | "somewhat_strong" | "not_strong";

export type Band =
  | "identical"
  | "very_similar"
  | "similar"
  | "somewhat_similar"
  | "not_similar";

export type VerdictKind = "together" | "separate" | "analyst_choice";

export interface VerdictObj {
  kind: VerdictKind;
  default?: VerdictKind;
}

export interface NodeObj {
  id: string;
  kind: string;
  label?: string;
  callee?: string;
}

export interface FlowObj {
  source: string;
  target: string;
  when?: string[];
}

export interface DefinitionObj {
  id: string;
  name: string;
  level: number;
  nodes: NodeObj[];
  flows: FlowObj[];
}

export interface ProjectDoc {
  revision: number;
  project: {
    format_version: number;
    repository: { root: string; definitions: DefinitionObj[] };
    drivers: unknown[];
    variants: unknown[];
    [key: string]: unknown;
  };
  strength_questions: { strength: Strength; question: string }[];
  catalog: { class: string; round: number; question: string }[];
}

export interface MatrixRow {
  id: string;
  name: string;
  class: string;
  strength: Strength;
  subcategories: string[];
}

export interface MatrixCell {
  driver: string;
  subprocess: string;
  band: Band | null;
  identical: boolean;
  entries: { variant: string; subcategory_path: string }[];
}

export interface MatrixDoc {
  rows: MatrixRow[];
  columns: { id: string; label: string }[];
  cells: MatrixCell[];
}

export interface DecisionRowObj {
  group: string;
  subprocess: string;
  driver: string;
  variants: string[];
  level: number;
  strength: Strength;
  band: Band | null;
  verdict: VerdictObj;
  effective: VerdictKind;
  rule: string;
  source: string;
}

export interface DecisionsDoc {
  rows: DecisionRowObj[];
}

export interface MapBranch {
  subprocess: string;
  group: string;
  variants: string[];
  label: string;
  call_node: string;
  split_node: string;
  join_node: string;
  verdict?: VerdictObj;
  effective?: VerdictKind;
  rule?: string;
  strength?: Strength;
  band?: Band | null;
  level?: number;
}

export interface MapDoc {
  definition: DefinitionObj;
  branches: MapBranch[];
}

export interface MetricsDoc {
  model_count: number;
  main_count: number;
  subprocess_count: number;
  activity_node_count: number;
  duplicate_occurrences: number;
  duplication_rate: number;
  duplication_percent: string;
  arc_count: number;
  node_count: number;
  cnc: number;
}

export interface CompareDoc {
  consolidated: MetricsDoc;
  fragmented: MetricsDoc;
  deltas: {
    activity_nodes_pct: number | null;
    subprocess_models_pct: number | null;
    duplication_rate_pts: number;
    cnc_pct: number | null;
    rendered: {
      activity_nodes: string;
      subprocess_models: string;
      duplication_rate: string;
      cnc: string;
    };
  };
}

export interface ScenarioRequest {
  ratings?: Record<string, Strength>;
  bands?: Record<string, Band>;
  verdicts?: Record<string, VerdictObj>;
}

export interface ScenarioDoc {
  verdicts: DecisionsDoc;
  map: MapDoc;
  metrics: CompareDoc;
}
