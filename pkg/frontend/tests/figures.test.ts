import { mkdtempSync, existsSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { parseCsvText, SchemaError } from "../src/csv.js";
import {
  renderCharfnFit,
  renderDivergenceBars,
  renderFigure,
  renderLcltCurve,
  renderRangeCurve,
} from "../src/figures.js";
import { main } from "../src/main.js";

const LCLT_CSV = `# seed=1 config=demo
n,gap,defect_bound,variance_ratio,source
64,7.192,2.07e-12,0.285,u-exact
256,11.897,3.1e-11,0.554,u-exact
1024,12.057,2.8e-10,0.75,u-exact
4096,6.324,3.0e-09,0.891,u-exact
`;

const RANGE_CSV = `# seed=1 config=demo
n,mean_range_ratio,stderr_mean,var_scaled,k_hat,samples
250,0.9869,0.001,0.0005,0.207,30
1000,0.9953,0.0003,0.0001,0.149,30
4000,0.9984,0.0001,0.00003,0.099,30
`;

const DIVERGE_CSV = `# seed=1 config=demo
k,n_mark,avg_at_n,stderr_n,m_mark,avg_at_m,stderr_m
1,32,0.5,0,64,0.2607,0.0009
2,128,0.3757,0.0005,512,0.0951,0.0001
3,2048,0.3985,0.0001,12288,0.0665,0.0001
`;

const CHARFN_CSV = `# seed=1 config=demo
n,applicable,l_fit,c_fit,passed
256,1,0.0714,0.1739,1
1024,1,0.0832,0.1243,1
4096,1,0.1177,0.0914,1
`;

describe("csv parsing", () => {
  it("reads comment headers and types numbers", () => {
    const rows = parseCsvText(LCLT_CSV, ["n", "gap"]);
    expect(rows).toHaveLength(4);
    expect(rows[0]["n"]).toBe(64);
    expect(rows[0]["source"]).toBe("u-exact");
  });

  it("rejects an empty csv", () => {
    expect(() => parseCsvText("# seed=1\nn,gap\n", ["n", "gap"])).toThrow(SchemaError);
  });

  it("rejects missing columns with a descriptive message", () => {
    expect(() => parseCsvText(LCLT_CSV, ["n", "no_such_column"])).toThrow(/no_such_column/);
  });
});

describe("figure renderers", () => {
  it("renders the lclt curve with a defect band", () => {
    const svg = renderLcltCurve(parseCsvText(LCLT_CSV, ["n", "gap", "defect_bound"]));
    expect(svg).toContain("<svg");
    expect(svg).toContain("polyline");
    expect(svg).toContain("polygon"); // the band
    expect(svg).toContain("u-exact");
    expect(svg.length).toBeGreaterThan(500);
  });

  it("renders the range curve with error bars and the density-one line", () => {
    const svg = renderRangeCurve(parseCsvText(RANGE_CSV, ["n", "mean_range_ratio"]));
    expect(svg).toContain("mean |R_n| / n");
    expect((svg.match(/<circle/g) ?? []).length).toBe(3);
  });

  it("renders paired divergence bars", () => {
    const svg = renderDivergenceBars(parseCsvText(DIVERGE_CSV, ["k", "avg_at_n", "avg_at_m"]));
    expect((svg.match(/<rect/g) ?? []).length).toBeGreaterThanOrEqual(7); // bg + 6 bars
    expect(svg).toContain("N_k");
  });

  it("renders the characteristic-function fits", () => {
    const svg = renderCharfnFit(parseCsvText(CHARFN_CSV, ["n", "l_fit", "c_fit"]));
    expect((svg.match(/polyline/g) ?? []).length).toBeGreaterThanOrEqual(2);
  });

  it("refuses charfn input with no applicable rows", () => {
    const text = CHARFN_CSV.replace(/,1,/g, ",0,");
    expect(() => renderCharfnFit(parseCsvText(text, ["n", "l_fit"]))).toThrow(/applicable/);
  });

  it("is deterministic", () => {
    const rows = parseCsvText(LCLT_CSV, ["n", "gap"]);
    expect(renderLcltCurve(rows)).toBe(renderLcltCurve(rows));
  });
});

describe("cli entry", () => {
  it("renders every kind end to end and writes files", () => {
    const dir = mkdtempSync(join(tmpdir(), "figs-"));
    const inputs: Array<[string, string, string]> = [
      ["lclt_curve", "lclt.csv", LCLT_CSV],
      ["range_curve", "range.csv", RANGE_CSV],
      ["divergence_bars", "div.csv", DIVERGE_CSV],
      ["charfn_fit", "charfn.csv", CHARFN_CSV],
    ];
    for (const [kind, name, text] of inputs) {
      const input = join(dir, name);
      writeFileSync(input, text);
      const out = join(dir, `${kind}.svg`);
      expect(main([kind, "--input", input, "--out", out])).toBe(0);
      expect(existsSync(out)).toBe(true);
    }
  });

  it("does not write a file for an empty csv", () => {
    const dir = mkdtempSync(join(tmpdir(), "figs-"));
    const input = join(dir, "empty.csv");
    writeFileSync(input, "# seed=1\nn,gap,defect_bound,variance_ratio,source\n");
    const out = join(dir, "empty.svg");
    expect(main(["lclt_curve", "--input", input, "--out", out])).toBe(1);
    expect(existsSync(out)).toBe(false);
  });

  it("rejects unknown kinds and missing flags", () => {
    expect(main(["not_a_kind"])).toBe(2);
    expect(main(["lclt_curve"])).toBe(2);
  });

  it("fails cleanly on a wrong-schema csv via renderFigure", () => {
    const dir = mkdtempSync(join(tmpdir(), "figs-"));
    const input = join(dir, "wrong.csv");
    writeFileSync(input, "a,b\n1,2\n");
    expect(() => renderFigure({ kind: "range_curve", input, output: "x" })).toThrow(SchemaError);
  });
});
