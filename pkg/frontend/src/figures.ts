import { existsSync, mkdirSync, readdirSync, writeFileSync } from "fs";
import { join } from "path";

import { readCsv, requireColumns, toNumber } from "./csv.js";
import { MarkerLine, renderPlot, Series } from "./svg.js";

export interface FigureSpec {
  scenario: string;
  kind: "sweep" | "trace";
  xColumn: string;
  seriesColumn: string;
  yColumn: string;
  bandColumn: string;
  markerColumn?: string; // per-series predicted value, drawn as a vertical line
  title: string;
  xLabel: string;
  yLabel: string;
  outFile: string;
}

export function builtinFigures(): FigureSpec[] {
  const sweep = (scenario: string, extra: Partial<FigureSpec>): FigureSpec => ({
    scenario,
    kind: "sweep",
    xColumn: "sweep_value",
    seriesColumn: "series",
    yColumn: "mean_final_w1",
    bandColumn: "stderr_final_w1",
    title: scenario,
    xLabel: "sweep value",
    yLabel: "final distance to sensitive data",
    outFile: `${scenario}.svg`,
    ...extra,
  });
  return [
    sweep("fig2_T_sweep", {
      markerColumn: "predicted_T",
      title: "Final error vs number of evolution steps",
      xLabel: "evolution steps T",
    }),
    sweep("fig2_ns_sweep", {
      markerColumn: "predicted_ns",
      title: "Final error vs number of synthetic samples",
      xLabel: "synthetic samples n_s",
    }),
    {
      scenario: "fig5_init",
      kind: "trace",
      xColumn: "t",
      seriesColumn: "", // one trace aggregate file per series
      yColumn: "mean_w1",
      bandColumn: "stderr_w1",
      title: "Error trace by initialization",
      xLabel: "iteration t",
      yLabel: "distance to sensitive data",
      outFile: "fig5_init.svg",
    },
    sweep("appB_d_sweep", {
      title: "Final error vs dimension",
      xLabel: "dimension d",
    }),
    sweep("appB_eps_sweep", {
      title: "Final error vs privacy budget",
      xLabel: "epsilon",
    }),
    sweep("appF_clustered", {
      title: "Laplace-threshold vs Gaussian histograms",
      xLabel: "sensitive data radius",
    }),
    sweep("psmm_vs_pe", {
      title: "One-shot signed-measure mechanism vs evolution",
      xLabel: "sensitive sample size n",
    }),
  ];
}

function renderSweep(csvPath: string, spec: FigureSpec): string {
  const table = readCsv(csvPath);
  requireColumns(table, [spec.xColumn, spec.seriesColumn, spec.yColumn, spec.bandColumn], csvPath);
  if (spec.markerColumn) {
    requireColumns(table, [spec.markerColumn], csvPath);
  }
  const bySeries = new Map<string, { x: number[]; y: number[]; band: number[] }>();
  const markers = new Map<string, number>();
  for (const row of table.rows) {
    const label = row[spec.seriesColumn];
    if (!bySeries.has(label)) {
      bySeries.set(label, { x: [], y: [], band: [] });
    }
    const bucket = bySeries.get(label)!;
    bucket.x.push(toNumber(row[spec.xColumn], spec.xColumn));
    bucket.y.push(toNumber(row[spec.yColumn], spec.yColumn));
    bucket.band.push(toNumber(row[spec.bandColumn], spec.bandColumn));
    if (spec.markerColumn && row[spec.markerColumn] !== "") {
      markers.set(label, toNumber(row[spec.markerColumn], spec.markerColumn));
    }
  }
  const series: Series[] = [...bySeries.entries()].map(([label, data]) => ({
    label,
    x: data.x,
    y: data.y,
    band: data.band,
  }));
  const markerLines: MarkerLine[] = [...markers.entries()].map(([label, x]) => ({
    x,
    label: `predicted (${label})`,
  }));
  return renderPlot({
    title: spec.title,
    xLabel: spec.xLabel,
    yLabel: spec.yLabel,
    series,
    markers: markerLines,
  });
}

function renderTrace(scenarioDir: string, spec: FigureSpec): string {
  const prefix = "trace_aggregate_";
  const files = readdirSync(scenarioDir)
    .filter((f) => f.startsWith(prefix) && f.endsWith(".csv"))
    .sort();
  if (files.length === 0) {
    throw new Error(`no ${prefix}*.csv files in ${scenarioDir}`);
  }
  const series: Series[] = files.map((file) => {
    const path = join(scenarioDir, file);
    const table = readCsv(path);
    requireColumns(table, [spec.xColumn, spec.yColumn, spec.bandColumn], path);
    return {
      label: file.slice(prefix.length, -4),
      x: table.rows.map((r) => toNumber(r[spec.xColumn], spec.xColumn)),
      y: table.rows.map((r) => toNumber(r[spec.yColumn], spec.yColumn)),
      band: table.rows.map((r) => toNumber(r[spec.bandColumn], spec.bandColumn)),
    };
  });
  return renderPlot({
    title: spec.title,
    xLabel: spec.xLabel,
    yLabel: spec.yLabel,
    series,
  });
}

/** Render one figure; returns the SVG text. */
export function renderFigure(resultsDir: string, spec: FigureSpec): string {
  const scenarioDir = join(resultsDir, spec.scenario);
  if (!existsSync(scenarioDir)) {
    throw new Error(`scenario directory not found: ${scenarioDir}`);
  }
  if (spec.kind === "trace") {
    return renderTrace(scenarioDir, spec);
  }
  return renderSweep(join(scenarioDir, "sweep_aggregate.csv"), spec);
}

export interface RenderReport {
  rendered: string[];
  skipped: string[];
}

/** Render every built-in figure whose scenario directory exists. */
export function renderAll(resultsDir: string, outDir: string): RenderReport {
  mkdirSync(outDir, { recursive: true });
  const report: RenderReport = { rendered: [], skipped: [] };
  for (const spec of builtinFigures()) {
    if (!existsSync(join(resultsDir, spec.scenario))) {
      report.skipped.push(spec.scenario);
      continue;
    }
    const svg = renderFigure(resultsDir, spec);
    const outPath = join(outDir, spec.outFile);
    writeFileSync(outPath, svg);
    report.rendered.push(outPath);
  }
  return report;
}
