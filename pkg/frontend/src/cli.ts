#!/usr/bin/env node
import { renderAll } from "./figures.js";

function main(argv: string[]): number {
  if (argv.length !== 2) {
    console.error("usage: plot_figures <results_dir> <out_dir>");
    return 2;
  }
  const [resultsDir, outDir] = argv;
  const report = renderAll(resultsDir, outDir);
  for (const path of report.rendered) {
    console.log(`wrote ${path}`);
  }
  for (const scenario of report.skipped) {
    console.log(`skipped ${scenario} (no results directory)`);
  }
  if (report.rendered.length === 0) {
    console.error("no scenario directories found; nothing rendered");
    return 1;
  }
  return 0;
}

process.exitCode = main(process.argv.slice(2));
