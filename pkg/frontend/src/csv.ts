/**
 * CSV loading with schema validation against the documented report columns.
 *
 * The report files start with `# seed=... config=...` comment lines, then a
 * header row; all figure inputs are numeric except the `source` column.
 */

import { readFileSync } from "node:fs";
import Papa from "papaparse";

export type Row = Record<string, number | string>;

export class SchemaError extends Error {}

export function parseCsvText(text: string, required: string[]): Row[] {
  const parsed = Papa.parse<Row>(text, {
    header: true,
    comments: "#",
    dynamicTyping: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new SchemaError(`csv parse error: ${first.message} (row ${first.row})`);
  }
  const rows = parsed.data;
  if (rows.length === 0) {
    throw new SchemaError("csv has no data rows");
  }
  const have = new Set(Object.keys(rows[0]));
  const missing = required.filter((c) => !have.has(c));
  if (missing.length > 0) {
    throw new SchemaError(
      `csv is missing required columns: ${missing.join(", ")} (found: ${[...have].join(", ")})`,
    );
  }
  for (const [i, row] of rows.entries()) {
    for (const col of required) {
      const v = row[col];
      if (v === null || v === undefined || (typeof v === "number" && Number.isNaN(v) && col !== "gamma_fit")) {
        throw new SchemaError(`row ${i} has no usable value in column ${col}`);
      }
    }
  }
  return rows;
}

export function loadCsv(path: string, required: string[]): Row[] {
  return parseCsvText(readFileSync(path, "utf-8"), required);
}

export function numbers(rows: Row[], col: string): number[] {
  return rows.map((r) => {
    const v = r[col];
    if (typeof v !== "number" || !Number.isFinite(v)) {
      throw new SchemaError(`column ${col} has a non-numeric value: ${String(v)}`);
    }
    return v;
  });
}
