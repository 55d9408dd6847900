/** Payload types of the paramsens query service (schema paramsens/<name>@1). */

export interface ParameterInfo {
  name: string;
  lo: number;
  hi: number;
}

export interface SampleInfo {
  sample_id: number;
  star_id: number;
  branch_param: string | null;
  step_offset: number;
  values: number[];
  status: string;
  fiber_count: number | null;
}

export interface StudyPayload {
  schema: string;
  parameters: ParameterInfo[];
  sampling: { stars: number; step: number; seed: number };
  characteristics: string[];
  divergence: string;
  samples: SampleInfo[];
}

export interface MatrixPayload {
  schema: string;
  parameters: string[];
  characteristics: string[];
  values: number[][];
  raw: number[][];
  divergence: string;
  default_axes: string[];
}

export interface RegionalCurvePayload {
  bin_centers: number[];
  means: (number | null)[];
  counts: number[];
}

export interface InfluenceMarker {
  sample_id: number;
  star_id: number;
  value: number;
  siblings: { sample_id: number; value: number; step_offset: number }[];
}

export interface InfluencePayload {
  schema: string;
  parameter: string;
  characteristic: string;
  range: [number, number];
  bin_edges: number[];
  average_histogram: number[];
  per_bin_variation: (number | null)[];
  regional: RegionalCurvePayload;
  global: number | null;
  global_best_match: number | null;
  local: Record<string, number>;
  markers: InfluenceMarker[];
}

export interface MdsPayload {
  schema: string;
  sample_ids: number[];
  coordinates: number[][];
  stress: number;
  trivial: boolean;
}

export interface StarSegment {
  a: number;
  b: number;
  star_id: number;
  branch_param: string;
}

export interface StarsPayload {
  schema: string;
  selected: number[];
  stars: number[];
  segments: StarSegment[];
  reference: { mode: "selected" | "center" | "none"; reference_id?: number };
  dissimilarity: Record<string, number>;
}

export interface SlicePayload {
  schema: string;
  axis: string;
  index: number;
  dims: number[];
  origin: number[];
  spacing: number[];
  in_plane_axes: string[];
  values: number[][];
  sample_id?: number;
}

export interface DiffPanelPayload {
  fiber_id: number;
  match_id: number | null;
  dissimilarity: number;
  ref_only: number[][];
  other_only: number[][];
}

export interface DiffPayload {
  schema: string;
  ref: number;
  other: number;
  panels: DiffPanelPayload[];
}
