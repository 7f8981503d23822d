/** Line-chart rendering to SVG markup strings.  Scales, ticks and path
 *  generation are pure functions; no DOM access, so they unit-test cleanly
 *  and the markup can be injected anywhere. */

import type { Series } from "./types.js";

export interface Scale {
  (x: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const fn = ((x: number) => r0 + ((x - d0) / span) * (r1 - r0)) as Scale;
  fn.domain = domain;
  fn.range = range;
  return fn;
}

/** Round tick positions covering [min, max] at a 1/2/5 step. */
export function niceTicks(min: number, max: number, count = 6): number[] {
  if (!(max > min)) return [min];
  const raw = (max - min) / Math.max(1, count);
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const norm = raw / mag;
  const step = (norm >= 5 ? 5 : norm >= 2 ? 2 : 1) * mag;
  // index-based to avoid accumulating rounding across additions
  const i0 = Math.ceil(min / step - 1e-9);
  const i1 = Math.floor(max / step + 1e-9);
  const ticks: number[] = [];
  for (let i = i0; i <= i1; i++) {
    ticks.push(i === 0 ? 0 : i * step);
  }
  return ticks;
}

export function seriesExtent(series: Series[]): { x: [number, number]; y: [number, number] } {
  let xMin = Infinity, xMax = -Infinity, yMin = Infinity, yMax = -Infinity;
  for (const s of series) {
    for (const v of s.r) {
      if (v < xMin) xMin = v;
      if (v > xMax) xMax = v;
    }
    for (const v of s.f) {
      if (v < yMin) yMin = v;
      if (v > yMax) yMax = v;
    }
  }
  if (!isFinite(xMin)) return { x: [0, 1], y: [0, 1] };
  if (yMin === yMax) {
    yMin -= 0.5;
    yMax += 0.5;
  }
  return { x: [xMin, xMax], y: [yMin, yMax] };
}

export function polylinePoints(s: Series, xScale: Scale, yScale: Scale): string {
  const parts: string[] = [];
  for (let i = 0; i < s.r.length; i++) {
    parts.push(`${xScale(s.r[i]).toFixed(2)},${yScale(s.f[i]).toFixed(2)}`);
  }
  return parts.join(" ");
}

export interface ChartOptions {
  width?: number;
  height?: number;
  margin?: number;
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

/** Render series to a standalone SVG string with axes and a legend. */
export function renderChart(series: Series[], options: ChartOptions = {}): string {
  const width = options.width ?? 720;
  const height = options.height ?? 420;
  const margin = options.margin ?? 46;
  const { x, y } = seriesExtent(series);
  const xs = linearScale(x, [margin, width - 12]);
  const ys = linearScale(y, [height - margin, 12]);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" class="chart">`,
  );
  // axes
  parts.push(
    `<line x1="${margin}" y1="${ys(y[0])}" x2="${width - 12}" y2="${ys(y[0])}" class="axis"/>`,
    `<line x1="${margin}" y1="${ys(y[0])}" x2="${margin}" y2="${ys(y[1])}" class="axis"/>`,
  );
  for (const t of niceTicks(x[0], x[1])) {
    const px = xs(t);
    parts.push(
      `<line x1="${px.toFixed(2)}" y1="${height - margin}" x2="${px.toFixed(2)}" y2="${height - margin + 5}" class="axis"/>`,
      `<text x="${px.toFixed(2)}" y="${height - margin + 18}" text-anchor="middle" class="tick">${formatTick(t)}</text>`,
    );
  }
  for (const t of niceTicks(y[0], y[1], 5)) {
    const py = ys(t);
    parts.push(
      `<line x1="${margin - 5}" y1="${py.toFixed(2)}" x2="${margin}" y2="${py.toFixed(2)}" class="axis"/>`,
      `<text x="${margin - 8}" y="${(py + 4).toFixed(2)}" text-anchor="end" class="tick">${formatTick(t)}</text>`,
    );
  }
  // zero line when the range crosses zero
  if (y[0] < 0 && y[1] > 0) {
    parts.push(
      `<line x1="${margin}" y1="${ys(0).toFixed(2)}" x2="${width - 12}" y2="${ys(0).toFixed(2)}" class="zero"/>`,
    );
  }
  series.forEach((s, i) => {
    const style = s.style ?? {};
    const color = style.color ?? "#1f77b4";
    const widthAttr = style.width ?? 2;
    const dash = style.dash ? ' stroke-dasharray="6 4"' : "";
    parts.push(
      `<polyline fill="none" stroke="${color}" stroke-width="${widthAttr}"${dash} points="${polylinePoints(s, xs, ys)}"/>`,
    );
    const ly = 18 + 16 * i;
    parts.push(
      `<line x1="${width - 170}" y1="${ly}" x2="${width - 146}" y2="${ly}" stroke="${color}" stroke-width="${widthAttr}"${dash}/>`,
      `<text x="${width - 140}" y="${ly + 4}" class="legend">${esc(s.label)}</text>`,
    );
  });
  parts.push("</svg>");
  return parts.join("");
}

export function formatTick(value: number): string {
  if (value === 0) return "0";
  const a = Math.abs(value);
  if (a >= 1e4 || a < 1e-3) return value.toExponential(1);
  return String(parseFloat(value.toPrecision(6)));
}
