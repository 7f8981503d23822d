/** Four-step explorer: acquire curves, decompose, edit terms, plot/export.
 *  Every number shown comes from a session-API response; the client holds
 *  only workflow state. */

import { ApiClient, ApiError } from "./api.js";
import { buildPickerCells, labelsForSymbol } from "./periodic.js";
import { renderChart } from "./plot.js";
import {
  addCurve,
  applyEditResponse,
  availableSeries,
  emptyState,
  setDecomposition,
  togglePlotSelection,
  WorkflowState,
} from "./session.js";
import type { DecomposeOptions, TermEdit } from "./types.js";

const api = new ApiClient();
let state: WorkflowState;
let scatterers: string[] = [];
let activeCurve = "";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function setStatus(text: string, isError = false): void {
  const box = el<HTMLElement>("status");
  box.textContent = text;
  box.className = isError ? "status error" : "status";
}

async function guard<T>(work: () => Promise<T>): Promise<T | undefined> {
  try {
    return await work();
  } catch (err) {
    setStatus(err instanceof ApiError ? err.message : String(err), true);
    return undefined;
  }
}

// ---- step a: curve acquisition ------------------------------------------

function renderPicker(): void {
  const grid = el<HTMLElement>("picker");
  grid.innerHTML = "";
  for (const cell of buildPickerCells(scatterers)) {
    const button = document.createElement("button");
    button.textContent = cell.symbol;
    button.disabled = !cell.enabled;
    button.className = "cell";
    button.style.gridRow = String(cell.period);
    button.style.gridColumn = String(cell.group);
    button.addEventListener("click", () => {
      const labels = labelsForSymbol(scatterers, cell.symbol);
      el<HTMLInputElement>("atom-label").value = labels[0] ?? cell.symbol;
    });
    grid.appendChild(button);
  }
}

function renderCurveList(): void {
  const list = el<HTMLElement>("curve-list");
  list.innerHTML = "";
  for (const curve of state.curves) {
    const item = document.createElement("li");
    const dec = state.decompositions[curve.label];
    item.textContent = dec
      ? `${curve.label} - ${dec.terms.length} terms, max |diff| ${dec.residual_max_range.toExponential(2)}`
      : `${curve.label} - not decomposed`;
    if (curve.label === activeCurve) item.className = "active";
    item.addEventListener("click", () => {
      activeCurve = curve.label;
      renderAll();
    });
    list.appendChild(item);
  }
}

async function acquireAtom(): Promise<void> {
  const label = el<HTMLInputElement>("atom-label").value.trim();
  const resolution = Number(el<HTMLInputElement>("atom-resolution").value);
  const b0 = Number(el<HTMLInputElement>("atom-b0").value);
  const rMax = Number(el<HTMLInputElement>("atom-rmax").value);
  await guard(async () => {
    const curve = await api.createCurve(state.session, {
      source: "atom",
      scatterer: label,
      resolution,
      b0,
      r_max: rMax,
    });
    state = addCurve(state, curve);
    activeCurve = curve.label;
    setStatus(`acquired image of ${label} at ${resolution} A`);
    renderAll();
  });
}

async function acquireExpression(): Promise<void> {
  const text = el<HTMLTextAreaElement>("expr-text").value.trim();
  const rMax = Number(el<HTMLInputElement>("expr-rmax").value);
  const step = Number(el<HTMLInputElement>("expr-step").value);
  const originRaw = el<HTMLInputElement>("expr-origin").value.trim();
  const label = el<HTMLInputElement>("expr-label").value.trim() || undefined;
  await guard(async () => {
    const curve = await api.createCurve(state.session, {
      source: "expression",
      text,
      r_max: rMax,
      step,
      origin_value: originRaw === "" ? undefined : Number(originRaw),
      label,
    });
    state = addCurve(state, curve);
    activeCurve = curve.label;
    setStatus(`sampled expression as ${curve.label}`);
    renderAll();
  });
}

async function acquireUpload(): Promise<void> {
  const text = el<HTMLTextAreaElement>("upload-text").value;
  const column = el<HTMLInputElement>("upload-column").value.trim() || undefined;
  await guard(async () => {
    const curve = await api.createCurve(state.session, { source: "file", text, column });
    state = addCurve(state, curve);
    activeCurve = curve.label;
    setStatus(`uploaded curve ${curve.label}`);
    renderAll();
  });
}

// ---- step b: decomposition ------------------------------------------------

function readOptions(): DecomposeOptions {
  const options: DecomposeOptions = {};
  const epsDec = el<HTMLInputElement>("opt-eps-dec").value.trim();
  if (epsDec) options.eps_dec = Number(epsDec);
  const epsPeak = el<HTMLInputElement>("opt-eps-peak").value.trim();
  if (epsPeak) options.eps_peak = Number(epsPeak);
  const epsTerm = el<HTMLInputElement>("opt-eps-term").value.trim();
  if (epsTerm) options.eps_term = Number(epsTerm);
  const peaks = el<HTMLInputElement>("opt-max-peaks").value.trim();
  if (peaks) options.max_peaks = Number(peaks);
  options.protocol = el<HTMLSelectElement>("opt-protocol")
    .value as DecomposeOptions["protocol"];
  return options;
}

async function runDecompose(): Promise<void> {
  if (!activeCurve) {
    setStatus("acquire and select a curve first", true);
    return;
  }
  setStatus(`decomposing ${activeCurve}...`);
  await guard(async () => {
    const summary = await api.decompose(state.session, activeCurve, readOptions());
    state = setDecomposition(state, summary);
    setStatus(
      `${summary.label}: ${summary.terms.length} terms, ` +
        `max |diff| ${summary.residual_max_range.toExponential(3)}, ` +
        (summary.converged ? "converged" : "NOT converged"),
    );
    renderAll();
  });
}

// ---- step c: what-if term editing -----------------------------------------

function renderTerms(): void {
  const body = el<HTMLTableSectionElement>("term-rows");
  body.innerHTML = "";
  const terms = state.editedTerms[activeCurve] ?? [];
  terms.forEach((term, index) => {
    const row = document.createElement("tr");
    if (!term.enabled) row.className = "disabled";

    const toggle = document.createElement("input");
    toggle.type = "checkbox";
    toggle.checked = term.enabled;
    toggle.addEventListener("change", () =>
      submitEdits([{ op: toggle.checked ? "enable" : "disable", index }]),
    );
    row.appendChild(wrapCell(toggle));

    for (const key of ["R", "B", "C"] as const) {
      const input = document.createElement("input");
      input.type = "text";
      input.value = String(term[key]);
      input.addEventListener("change", () => {
        const value = Number(input.value);
        submitEdits([{ op: "modify", index, [key]: value } as TermEdit]);
      });
      row.appendChild(wrapCell(input));
    }
    body.appendChild(row);
  });
}

function wrapCell(node: HTMLElement): HTMLTableCellElement {
  const cell = document.createElement("td");
  cell.appendChild(node);
  return cell;
}

async function addTerm(): Promise<void> {
  const read = (id: string) => Number(el<HTMLInputElement>(id).value);
  await submitEdits([
    { op: "add", R: read("add-r"), B: read("add-b"), C: read("add-c") },
  ]);
}

async function submitEdits(edits: TermEdit[]): Promise<void> {
  if (!activeCurve) return;
  await guard(async () => {
    const response = await api.editTerms(state.session, activeCurve, edits);
    state = applyEditResponse(state, response);
    const max = Math.max(...response.residual.map(Math.abs));
    const rejected = response.rejected.length
      ? `; rejected ${response.rejected.length}: ${response.rejected[0].reason}`
      : "";
    setStatus(`recomputed ${activeCurve}: max |residual| ${max.toExponential(3)}${rejected}`);
    renderAll();
  });
}

// ---- step d: plotting and export ------------------------------------------

function renderSeriesChoices(): void {
  const box = el<HTMLElement>("series-choices");
  box.innerHTML = "";
  for (const id of availableSeries(state)) {
    const label = document.createElement("label");
    const check = document.createElement("input");
    check.type = "checkbox";
    check.checked = state.plotSelections.some((s) => s.id === id);
    check.addEventListener("change", () => {
      state = togglePlotSelection(state, id);
      void refreshChart();
    });
    label.appendChild(check);
    label.appendChild(document.createTextNode(" " + id));
    box.appendChild(label);
  }
}

async function refreshChart(): Promise<void> {
  renderSeriesChoices();
  const target = el<HTMLElement>("chart");
  if (!state.plotSelections.length) {
    target.innerHTML = "<p class='hint'>select series to plot</p>";
    return;
  }
  await guard(async () => {
    const { series } = await api.plotData(state.session, state.plotSelections);
    target.innerHTML = renderChart(series);
  });
}

async function exportSelected(): Promise<void> {
  if (!state.plotSelections.length) {
    setStatus("nothing selected to export", true);
    return;
  }
  await guard(async () => {
    const content = await api.exportCurves(
      state.session,
      state.plotSelections.map((s) => s.id),
    );
    const blob = new Blob([content], { type: "text/plain" });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = "curves.dat";
    link.click();
    URL.revokeObjectURL(link.href);
    setStatus("exported selected series");
  });
}

// ---- wiring ----------------------------------------------------------------

function renderAll(): void {
  renderCurveList();
  renderTerms();
  void refreshChart();
}

async function start(): Promise<void> {
  state = emptyState(await api.createSession());
  scatterers = await api.scatterers();
  renderPicker();
  el<HTMLButtonElement>("atom-run").addEventListener("click", () => void acquireAtom());
  el<HTMLButtonElement>("expr-run").addEventListener("click", () => void acquireExpression());
  el<HTMLButtonElement>("upload-run").addEventListener("click", () => void acquireUpload());
  el<HTMLButtonElement>("decompose-run").addEventListener("click", () => void runDecompose());
  el<HTMLButtonElement>("add-term").addEventListener("click", () => void addTerm());
  el<HTMLButtonElement>("export-run").addEventListener("click", () => void exportSelected());
  setStatus(`session ${state.session} ready`);
  renderAll();
}

if (typeof document !== "undefined") {
  void start();
}
