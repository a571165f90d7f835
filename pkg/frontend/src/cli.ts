/** Batch plotting entry point.
 *
 *   trailsim-plot --spec chart.json
 *   trailsim-plot --preset fig4 --in results/fig4 --out charts/
 *
 * A spec file holds one ChartSpec (kind, inputs, output).  Presets map the
 * runner's standard output layout to the matching chart kind.
 */
import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { dirname, join } from "node:path";

import { ChartKind, ChartSpec, renderChart } from "./charts.js";

interface Preset {
  kind: ChartKind;
  csv: string;
  title: string;
  out: string;
}

export const PRESETS: Record<string, Preset> = {
  fig3: {
    kind: "tx-dynamics",
    csv: "metrics_mean.csv",
    title: "Transactions approved, validation off",
    out: "fig3_tx_dynamics.svg",
  },
  fig4: {
    kind: "tx-dynamics",
    csv: "metrics_mean.csv",
    title: "Transactions approved, validation on",
    out: "fig4_tx_dynamics.svg",
  },
  recovery: {
    kind: "tx-dynamics",
    csv: "metrics_mean.csv",
    title: "Transactions approved with failed shard recovery",
    out: "recovery_tx_dynamics.svg",
  },
  compromised: {
    kind: "compromised-fraction",
    csv: "metrics_mean.csv",
    title: "Compromised wallets over time",
    out: "compromised_fraction.svg",
  },
  scaling: {
    kind: "throughput-vs-size",
    csv: "scaling_mean.csv",
    title: "Throughput vs network size",
    out: "throughput_scaling.svg",
  },
  mttf: {
    kind: "mttf-vs-shards",
    csv: "mttf_mean.csv",
    title: "Mean time to failure",
    out: "mttf_vs_shards.svg",
  },
  mttf_detection: {
    kind: "mttf-with-detection",
    csv: "mttf_mean.csv",
    title: "Mean time to failure with detection",
    out: "mttf_with_detection.svg",
  },
};

function parseArgs(argv: string[]): Map<string, string> {
  const args = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    if (!key.startsWith("--") || i + 1 >= argv.length) {
      throw new Error(`bad arguments near "${key}"`);
    }
    args.set(key.slice(2), argv[i + 1]);
  }
  return args;
}

export function main(argv: string[]): number {
  let spec: ChartSpec;
  try {
    const args = parseArgs(argv);
    if (args.has("spec")) {
      spec = JSON.parse(readFileSync(args.get("spec")!, "utf8")) as ChartSpec;
    } else if (args.has("preset")) {
      const preset = PRESETS[args.get("preset")!];
      if (!preset) {
        throw new Error(
          `unknown preset "${args.get("preset")}" (have: ${Object.keys(PRESETS).join(", ")})`,
        );
      }
      const inDir = args.get("in") ?? ".";
      const outDir = args.get("out") ?? ".";
      spec = {
        kind: preset.kind,
        inputs: [{ path: join(inDir, preset.csv) }],
        output: join(outDir, preset.out),
        title: preset.title,
      };
    } else {
      throw new Error("provide --spec PATH or --preset NAME [--in DIR] [--out DIR]");
    }
    const svg = renderChart(spec);
    mkdirSync(dirname(spec.output), { recursive: true });
    writeFileSync(spec.output, svg);
    console.log(`wrote ${spec.output}`);
    return 0;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
