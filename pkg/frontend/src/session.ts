/** Client-side workflow state: acquired curves, decompositions, the edited
 *  term list per curve and the current plot selections.  Pure functions so
 *  the state machine is testable without a DOM or a server. */

import type {
  CurveData,
  DecomposeSummary,
  EditedTerm,
  EditResponse,
  PlotSelection,
  SeriesStyle,
} from "./types.js";

export interface WorkflowState {
  session: string;
  curves: CurveData[];
  decompositions: Record<string, DecomposeSummary>;
  editedTerms: Record<string, EditedTerm[]>;
  lastRecompute?: EditResponse;
  plotSelections: PlotSelection[];
}

export function emptyState(session: string): WorkflowState {
  return {
    session,
    curves: [],
    decompositions: {},
    editedTerms: {},
    plotSelections: [],
  };
}

export function addCurve(state: WorkflowState, curve: CurveData): WorkflowState {
  if (state.curves.some((c) => c.label === curve.label)) {
    throw new Error(`curve ${curve.label} already acquired`);
  }
  return { ...state, curves: [...state.curves, curve] };
}

export function curveLabels(state: WorkflowState): string[] {
  return state.curves.map((c) => c.label);
}

/** Store a decomposition; the editable term list starts as a copy of the
 *  computed terms, all enabled. */
export function setDecomposition(
  state: WorkflowState,
  summary: DecomposeSummary,
): WorkflowState {
  const edited = summary.terms.map(([R, B, C]) => ({ R, B, C, enabled: true }));
  return {
    ...state,
    decompositions: { ...state.decompositions, [summary.label]: summary },
    editedTerms: { ...state.editedTerms, [summary.label]: edited },
  };
}

/** Fold the server's recompute response back into the state: the returned
 *  term list is authoritative. */
export function applyEditResponse(
  state: WorkflowState,
  response: EditResponse,
): WorkflowState {
  return {
    ...state,
    editedTerms: { ...state.editedTerms, [response.label]: response.terms },
    lastRecompute: response,
  };
}

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

export function defaultStyle(index: number, kind: string): SeriesStyle {
  return {
    color: PALETTE[index % PALETTE.length],
    width: kind === "residual" ? 1 : 2,
    dash: kind === "model",
  };
}

export function togglePlotSelection(
  state: WorkflowState,
  id: string,
): WorkflowState {
  const existing = state.plotSelections.findIndex((s) => s.id === id);
  if (existing >= 0) {
    return {
      ...state,
      plotSelections: state.plotSelections.filter((s) => s.id !== id),
    };
  }
  const kind = id.split(":", 1)[0];
  const selection: PlotSelection = {
    id,
    label: id.replace(":", " "),
    style: defaultStyle(state.plotSelections.length, kind),
  };
  return { ...state, plotSelections: [...state.plotSelections, selection] };
}

/** Identifiers plottable in the current state: every curve plus model and
 *  residual for decomposed ones. */
export function availableSeries(state: WorkflowState): string[] {
  const out: string[] = [];
  for (const c of state.curves) {
    out.push(`curve:${c.label}`);
    if (state.decompositions[c.label]) {
      out.push(`model:${c.label}`, `residual:${c.label}`);
    }
  }
  return out;
}
