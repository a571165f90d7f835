/** Minimal deterministic SVG line charts: fixed palette, linear scales,
 * labeled axes, legend. No canvas, no DOM. */
import { Series } from "./series.js";

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

export interface ChartOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  width?: number;
  height?: number;
}

function niceTicks(lo: number, hi: number, n = 5): number[] {
  if (hi === lo) {
    hi = lo + 1;
  }
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / n)));
  const err = span / n / step;
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const s = mult * step;
  const start = Math.ceil(lo / s) * s;
  const ticks: number[] = [];
  for (let v = start; v <= hi + 1e-12; v += s) {
    ticks.push(Number(v.toPrecision(12)));
  }
  return ticks;
}

function fmt(v: number): string {
  if (Number.isInteger(v)) {
    return String(v);
  }
  return String(Number(v.toPrecision(6)));
}

export function renderLineChart(series: Series[], opts: ChartOptions): string {
  const width = opts.width ?? 720;
  const height = opts.height ?? 480;
  const margin = { top: 44, right: 24, bottom: 52, left: 68 };
  const plotW = width - margin.left - margin.right;
  const plotH = height - margin.top - margin.bottom;

  const xs = series.flatMap((s) => s.x);
  const ys = series.flatMap((s) => s.y);
  const xLo = Math.min(...xs);
  const xHi = Math.max(...xs);
  let yLo = Math.min(...ys, 0);
  let yHi = Math.max(...ys);
  if (yHi === yLo) {
    yHi = yLo + 1;
  }
  const sx = (v: number) => margin.left + ((v - xLo) / (xHi - xLo || 1)) * plotW;
  const sy = (v: number) => margin.top + plotH - ((v - yLo) / (yHi - yLo)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="sans-serif" font-size="12">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(
    `<text x="${width / 2}" y="22" text-anchor="middle" font-size="15">${opts.title}</text>`,
  );

  for (const t of niceTicks(xLo, xHi)) {
    const x = sx(t);
    parts.push(
      `<line x1="${x.toFixed(2)}" y1="${margin.top}" x2="${x.toFixed(2)}" ` +
        `y2="${margin.top + plotH}" stroke="#dddddd"/>`,
    );
    parts.push(
      `<text x="${x.toFixed(2)}" y="${margin.top + plotH + 18}" text-anchor="middle">${fmt(t)}</text>`,
    );
  }
  for (const t of niceTicks(yLo, yHi)) {
    const y = sy(t);
    parts.push(
      `<line x1="${margin.left}" y1="${y.toFixed(2)}" x2="${margin.left + plotW}" ` +
        `y2="${y.toFixed(2)}" stroke="#dddddd"/>`,
    );
    parts.push(
      `<text x="${margin.left - 8}" y="${(y + 4).toFixed(2)}" text-anchor="end">${fmt(t)}</text>`,
    );
  }
  parts.push(
    `<rect x="${margin.left}" y="${margin.top}" width="${plotW}" height="${plotH}" ` +
      `fill="none" stroke="#333333"/>`,
  );
  parts.push(
    `<text x="${margin.left + plotW / 2}" y="${height - 12}" text-anchor="middle">${opts.xLabel}</text>`,
  );
  parts.push(
    `<text x="18" y="${margin.top + plotH / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 18 ${margin.top + plotH / 2})">${opts.yLabel}</text>`,
  );

  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const pts = s.x.map((x, k) => `${sx(x).toFixed(2)},${sy(s.y[k]).toFixed(2)}`).join(" ");
    parts.push(`<polyline points="${pts}" fill="none" stroke="${color}" stroke-width="1.8"/>`);
  });

  const legendX = margin.left + 12;
  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const y = margin.top + 14 + i * 18;
    parts.push(
      `<line x1="${legendX}" y1="${y}" x2="${legendX + 22}" y2="${y}" ` +
        `stroke="${color}" stroke-width="2"/>`,
    );
    parts.push(`<text x="${legendX + 28}" y="${y + 4}">${s.label}</text>`);
  });

  parts.push("</svg>");
  return parts.join("\n");
}
