/** The five chart kinds, wiring input CSVs to series and rendered SVG. */
import { readFileSync } from "node:fs";

import { parseCsv, Table } from "./csv.js";
import {
  compromisedSeries,
  mttfDetectionSeries,
  mttfSeries,
  Series,
  throughputSeries,
  txDynamicsSeries,
} from "./series.js";
import { ChartOptions, renderLineChart } from "./svg.js";

export const CHART_KINDS = [
  "tx-dynamics",
  "compromised-fraction",
  "throughput-vs-size",
  "mttf-vs-shards",
  "mttf-with-detection",
] as const;

export type ChartKind = (typeof CHART_KINDS)[number];

export interface ChartInput {
  path: string;
  label?: string;
}

export interface ChartSpec {
  kind: ChartKind;
  inputs: ChartInput[];
  output: string;
  title?: string;
}

function load(input: ChartInput): Table {
  return parseCsv(readFileSync(input.path, "utf8"), input.path);
}

export function buildSeries(spec: ChartSpec): { series: Series[]; options: ChartOptions } {
  switch (spec.kind) {
    case "tx-dynamics":
      return {
        series: txDynamicsSeries(load(spec.inputs[0])),
        options: {
          title: spec.title ?? "Transactions over time",
          xLabel: "round",
          yLabel: "cumulative transactions",
        },
      };
    case "compromised-fraction":
      return {
        series: compromisedSeries(
          spec.inputs.map((inp) => [load(inp), inp.label ?? inp.path]),
        ),
        options: {
          title: spec.title ?? "Compromised wallets",
          xLabel: "round",
          yLabel: "fraction of wallets",
        },
      };
    case "throughput-vs-size":
      return {
        series: throughputSeries(load(spec.inputs[0])),
        options: {
          title: spec.title ?? "Throughput vs network size",
          xLabel: "shard count",
          yLabel: "confirmed transactions per round",
        },
      };
    case "mttf-vs-shards":
      return {
        series: mttfSeries(load(spec.inputs[0])),
        options: {
          title: spec.title ?? "Mean time to failure",
          xLabel: "shard count",
          yLabel: "rounds until system failure",
        },
      };
    case "mttf-with-detection":
      return {
        series: mttfDetectionSeries(load(spec.inputs[0])),
        options: {
          title: spec.title ?? "Mean time to failure with detection",
          xLabel: "shard count",
          yLabel: "rounds until system failure",
        },
      };
    default: {
      const never: never = spec.kind;
      throw new Error(`unknown chart kind: ${never}`);
    }
  }
}

export function renderChart(spec: ChartSpec): string {
  const { series, options } = buildSeries(spec);
  if (series.length === 0 || series.every((s) => s.x.length === 0)) {
    throw new Error(`no plottable data for ${spec.kind} from ${spec.inputs[0]?.path}`);
  }
  return renderLineChart(series, options);
}
