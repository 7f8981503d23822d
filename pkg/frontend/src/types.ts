/** Payload shapes of the session API (parallel r/f arrays for curves). */

export interface CurveData {
  label: string;
  r: number[];
  f: number[];
}

/** One shell term as a [R, B, C] triple. */
export type TermTriple = [number, number, number];

export interface DecomposeSummary {
  label: string;
  terms: TermTriple[];
  initial_terms: TermTriple[];
  residual_max_full: number;
  residual_max_range: number;
  iterations: number;
  converged: boolean;
}

export interface DecomposeOptions {
  eps_dec?: number;
  eps_dec_scale?: "relative" | "absolute";
  eps_peak?: number;
  eps_term?: number;
  max_peaks?: number;
  protocol?: "iterative" | "single_pass" | "refine_each";
  decompose_range?: [number, number];
}

export interface EditedTerm {
  R: number;
  B: number;
  C: number;
  enabled: boolean;
}

export type TermEdit =
  | { op: "modify"; index: number; R?: number; B?: number; C?: number }
  | { op: "disable"; index: number }
  | { op: "enable"; index: number }
  | { op: "add"; R: number; B: number; C: number };

export interface EditResponse {
  label: string;
  r: number[];
  model: number[];
  residual: number[];
  terms: EditedTerm[];
  rejected: { edit: number; reason: string }[];
}

export interface SeriesStyle {
  color?: string;
  width?: number;
  dash?: boolean;
}

export interface PlotSelection {
  id: string; // "curve:<label>" | "model:<label>" | "residual:<label>"
  label?: string;
  style?: SeriesStyle;
}

export interface Series {
  id: string;
  label: string;
  style: SeriesStyle;
  r: number[];
  f: number[];
}

export type CurveSource =
  | { source: "file"; text: string; column?: string; label?: string }
  | {
      source: "atom";
      scatterer: string;
      resolution: number;
      b0?: number;
      r_max?: number;
      step?: number;
      label?: string;
    }
  | {
      source: "expression";
      text: string;
      r_max?: number;
      step?: number;
      origin_value?: number;
      label?: string;
    };
