/** Minimal deterministic SVG line-plot writer: mean lines, shaded error
 * bands, dashed vertical markers, axes with ticks, and a legend. */

export interface Series {
  label: string;
  x: number[];
  y: number[];
  band?: number[]; // half-width of the shaded band around y
}

export interface MarkerLine {
  x: number;
  label: string;
}

export interface PlotOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  markers?: MarkerLine[];
  width?: number;
  height?: number;
}

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const MARGIN = { left: 64, right: 16, top: 36, bottom: 48 };

function ticks(lo: number, hi: number, count = 6): number[] {
  if (!(hi > lo)) {
    return [lo];
  }
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const candidates = [step, 2 * step, 2.5 * step, 5 * step, 10 * step];
  const chosen = candidates.find((s) => span / s <= count) ?? 10 * step;
  const out: number[] = [];
  for (let v = Math.ceil(lo / chosen) * chosen; v <= hi + 1e-12 * span; v += chosen) {
    out.push(v);
  }
  return out;
}

function fmt(value: number): string {
  if (value === 0) return "0";
  const magnitude = Math.abs(value);
  if (magnitude >= 1000 || magnitude < 0.001) return value.toExponential(1);
  return Number(value.toPrecision(4)).toString();
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderPlot(options: PlotOptions): string {
  const width = options.width ?? 760;
  const height = options.height ?? 480;
  if (options.series.length === 0 || options.series.every((s) => s.x.length === 0)) {
    throw new Error(`no data to plot for '${options.title}'`);
  }
  const xs = options.series.flatMap((s) => s.x).concat((options.markers ?? []).map((m) => m.x));
  const ys = options.series.flatMap((s) =>
    s.y.flatMap((v, i) => (s.band ? [v - s.band[i], v + s.band[i]] : [v]))
  );
  let xLo = Math.min(...xs);
  let xHi = Math.max(...xs);
  let yLo = Math.min(...ys, 0);
  let yHi = Math.max(...ys);
  if (xHi === xLo) {
    xLo -= 0.5;
    xHi += 0.5;
  }
  if (yHi === yLo) {
    yHi = yLo + 1;
  }
  yHi *= 1.05;

  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;
  const sx = (v: number) => MARGIN.left + ((v - xLo) / (xHi - xLo)) * plotW;
  const sy = (v: number) => MARGIN.top + plotH - ((v - yLo) / (yHi - yLo)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="sans-serif" font-size="12">`
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(`<text x="${width / 2}" y="20" text-anchor="middle" font-size="14">${esc(options.title)}</text>`);

  // axes and ticks
  const axisY = MARGIN.top + plotH;
  parts.push(`<g stroke="#333" stroke-width="1">`);
  parts.push(`<line x1="${MARGIN.left}" y1="${axisY}" x2="${MARGIN.left + plotW}" y2="${axisY}"/>`);
  parts.push(`<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" y2="${axisY}"/>`);
  parts.push(`</g>`);
  for (const t of ticks(xLo, xHi)) {
    const x = sx(t);
    parts.push(`<line x1="${x}" y1="${axisY}" x2="${x}" y2="${axisY + 4}" stroke="#333"/>`);
    parts.push(`<text x="${x}" y="${axisY + 18}" text-anchor="middle">${fmt(t)}</text>`);
  }
  for (const t of ticks(yLo, yHi, 5)) {
    const y = sy(t);
    parts.push(`<line x1="${MARGIN.left - 4}" y1="${y}" x2="${MARGIN.left}" y2="${y}" stroke="#333"/>`);
    parts.push(`<line x1="${MARGIN.left}" y1="${y}" x2="${MARGIN.left + plotW}" y2="${y}" stroke="#eee"/>`);
    parts.push(`<text x="${MARGIN.left - 8}" y="${y + 4}" text-anchor="end">${fmt(t)}</text>`);
  }
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${height - 10}" text-anchor="middle">${esc(options.xLabel)}</text>`
  );
  parts.push(
    `<text x="16" y="${MARGIN.top + plotH / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 16 ${MARGIN.top + plotH / 2})">${esc(options.yLabel)}</text>`
  );

  // markers behind the data
  for (const marker of options.markers ?? []) {
    const x = sx(marker.x);
    parts.push(
      `<g class="marker"><line x1="${x}" y1="${MARGIN.top}" x2="${x}" y2="${axisY}" ` +
        `stroke="#555" stroke-dasharray="5,4"/>` +
        `<text x="${x + 4}" y="${MARGIN.top + 12}" fill="#555">${esc(marker.label)}</text></g>`
    );
  }

  options.series.forEach((series, index) => {
    const color = PALETTE[index % PALETTE.length];
    const order = series.x.map((_, i) => i).sort((a, b) => series.x[a] - series.x[b]);
    const px = order.map((i) => sx(series.x[i]));
    const py = order.map((i) => sy(series.y[i]));
    if (series.band) {
      const hi = order.map((i) => sy(series.y[i] + series.band![i]));
      const lo = order.map((i) => sy(series.y[i] - series.band![i]));
      const ring = px.map((x, i) => `${x},${hi[i]}`).concat(
        px.map((x, i) => `${x},${lo[i]}`).reverse()
      );
      parts.push(`<polygon points="${ring.join(" ")}" fill="${color}" opacity="0.15"/>`);
    }
    if (px.length > 1) {
      const path = px.map((x, i) => `${i === 0 ? "M" : "L"}${x},${py[i]}`).join(" ");
      parts.push(`<path d="${path}" fill="none" stroke="${color}" stroke-width="1.8"/>`);
    }
    px.forEach((x, i) => {
      parts.push(`<circle cx="${x}" cy="${py[i]}" r="2.6" fill="${color}"/>`);
    });
  });

  // legend
  options.series.forEach((series, index) => {
    const color = PALETTE[index % PALETTE.length];
    const y = MARGIN.top + 14 + index * 16;
    const x = MARGIN.left + plotW - 150;
    parts.push(`<line x1="${x}" y1="${y - 4}" x2="${x + 18}" y2="${y - 4}" stroke="${color}" stroke-width="2"/>`);
    parts.push(`<text x="${x + 24}" y="${y}">${esc(series.label)}</text>`);
  });

  parts.push(`</svg>`);
  return parts.join("\n");
}
