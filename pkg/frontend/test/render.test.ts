import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { CHART_KINDS, ChartSpec, renderChart } from "../src/charts.js";
import { main, PRESETS } from "../src/cli.js";

const FIXTURES = join(__dirname, "fixtures");

function specFor(kind: ChartSpec["kind"], out: string): ChartSpec {
  const csv = kind === "throughput-vs-size"
    ? "scaling_mean.csv"
    : kind.startsWith("mttf")
      ? "mttf_mean.csv"
      : "metrics_mean.csv";
  return {
    kind,
    inputs: [{ path: join(FIXTURES, csv), label: "fixture" }],
    output: out,
  };
}

describe("rendering", () => {
  it.each(CHART_KINDS.map((k) => [k]))("renders %s as a line chart", (kind) => {
    const svg = renderChart(specFor(kind, "unused.svg"));
    expect(svg).toContain("<svg");
    expect(svg).toContain("<polyline");
    expect(svg).toContain("</svg>");
  });

  it("renders deterministically", () => {
    const spec = specFor("tx-dynamics", "unused.svg");
    expect(renderChart(spec)).toBe(renderChart(spec));
  });

  it("legend carries every series label", () => {
    const svg = renderChart(specFor("throughput-vs-size", "unused.svg"));
    expect(svg).toContain("F=0");
    expect(svg).toContain("F=1");
  });

  it("missing columns surface by name, no image produced", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-"));
    const bad = join(dir, "bad.csv");
    writeFileSync(bad, "round,started_total\n1,2\n");
    const spec: ChartSpec = {
      kind: "tx-dynamics",
      inputs: [{ path: bad }],
      output: join(dir, "never.svg"),
    };
    expect(() => renderChart(spec)).toThrowError(/missing column "started_honest" in .*bad\.csv/);
  });

  it("empty csv is an error, not an empty image", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-"));
    const empty = join(dir, "empty.csv");
    writeFileSync(empty, "round,started_total\n");
    const spec: ChartSpec = {
      kind: "tx-dynamics",
      inputs: [{ path: empty }],
      output: join(dir, "never.svg"),
    };
    expect(() => renderChart(spec)).toThrowError(/no data rows/);
  });
});

describe("cli", () => {
  it("runs every preset against the fixture layout", () => {
    const out = mkdtempSync(join(tmpdir(), "plots-out-"));
    for (const name of Object.keys(PRESETS)) {
      const rc = main(["--preset", name, "--in", FIXTURES, "--out", out]);
      expect(rc, name).toBe(0);
      const svg = readFileSync(join(out, PRESETS[name].out), "utf8");
      expect(svg).toContain("<svg");
    }
  });

  it("runs from a spec file", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-spec-"));
    const out = join(dir, "chart.svg");
    const specPath = join(dir, "spec.json");
    writeFileSync(specPath, JSON.stringify(specFor("mttf-vs-shards", out)));
    expect(main(["--spec", specPath])).toBe(0);
    expect(readFileSync(out, "utf8")).toContain("<polyline");
  });

  it("reports unknown presets", () => {
    expect(main(["--preset", "nope"])).toBe(1);
  });
});
