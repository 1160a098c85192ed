import { readFileSync } from "fs";

export interface Table {
  columns: string[];
  rows: Record<string, string>[];
}

/** Parse a plain (unquoted) comma-separated file with a header row. */
export function readCsv(path: string): Table {
  const text = readFileSync(path, "utf8");
  const lines = text.split(/\r?\n/).filter((line) => line.trim().length > 0);
  if (lines.length === 0) {
    throw new Error(`empty CSV: ${path}`);
  }
  const columns = lines[0].split(",").map((c) => c.trim());
  const rows = lines.slice(1).map((line, i) => {
    const cells = line.split(",");
    if (cells.length !== columns.length) {
      throw new Error(`row ${i + 1} of ${path} has ${cells.length} cells, expected ${columns.length}`);
    }
    const row: Record<string, string> = {};
    columns.forEach((col, j) => {
      row[col] = cells[j].trim();
    });
    return row;
  });
  if (rows.length === 0) {
    throw new Error(`CSV has a header but no data rows: ${path}`);
  }
  return { columns, rows };
}

export function requireColumns(table: Table, needed: string[], path: string): void {
  for (const col of needed) {
    if (!table.columns.includes(col)) {
      throw new Error(`missing column '${col}' in ${path} (have: ${table.columns.join(", ")})`);
    }
  }
}

export function toNumber(value: string, column: string): number {
  const parsed = Number(value);
  if (!Number.isFinite(parsed)) {
    throw new Error(`non-numeric value '${value}' in column '${column}'`);
  }
  return parsed;
}
