/**
 * Entry point: one renderer per figure kind.
 *
 *   node dist/main.js <kind> --input report.csv --out figure.svg
 *
 * Fails without writing anything when the input is missing, empty, or has
 * the wrong columns.
 */

import { writeFileSync } from "node:fs";
import { FigureKind, REQUIRED_COLUMNS, renderFigure } from "./figures.js";

function usage(): string {
  const kinds = Object.keys(REQUIRED_COLUMNS).join(" | ");
  return `usage: cocyclelab-figures <${kinds}> --input <csv> --out <svg>`;
}

export function main(argv: string[]): number {
  const [kind, ...rest] = argv;
  if (!kind || !(kind in REQUIRED_COLUMNS)) {
    console.error(usage());
    return 2;
  }
  let input: string | undefined;
  let out: string | undefined;
  for (let i = 0; i < rest.length; i += 2) {
    const flag = rest[i];
    const value = rest[i + 1];
    if (flag === "--input") input = value;
    else if (flag === "--out") out = value;
    else {
      console.error(`unknown flag ${flag}\n${usage()}`);
      return 2;
    }
  }
  if (!input || !out) {
    console.error(usage());
    return 2;
  }
  let svg: string;
  try {
    svg = renderFigure({ kind: kind as FigureKind, input, output: out });
  } catch (err) {
    console.error(`render failed: ${(err as Error).message}`);
    return 1;
  }
  writeFileSync(out, svg);
  console.log(`wrote ${out}`);
  return 0;
}

const isDirectRun = process.argv[1] !== undefined &&
  import.meta.url.endsWith(process.argv[1].split("/").pop() as string);
if (isDirectRun) {
  process.exit(main(process.argv.slice(2)));
}
