/** CSV-to-series transforms for the five chart kinds.
 *
 * The runner emits per-round counts; cumulative sums for the dynamics
 * charts are computed here so its output stays minimal and replottable.
 */
import { Table, column, textColumn } from "./csv.js";

export interface Series {
  label: string;
  x: number[];
  y: number[];
}

export function cumulative(values: number[]): number[] {
  const out: number[] = [];
  let acc = 0;
  for (const v of values) {
    acc += v;
    out.push(acc);
  }
  return out;
}

/** Cumulative started/confirmed lines, honest vs total, over rounds. */
export function txDynamicsSeries(table: Table): Series[] {
  const round = column(table, "round");
  const picks: Array<[string, string]> = [
    ["started_total", "started (total)"],
    ["started_honest", "started (honest)"],
    ["confirmed_total", "confirmed (total)"],
    ["confirmed_honest", "confirmed (honest)"],
  ];
  return picks.map(([col, label]) => ({
    label,
    x: round,
    y: cumulative(column(table, col)),
  }));
}

/** Per-round compromised-wallet fraction, one line per labeled input. */
export function compromisedSeries(tables: Array<[Table, string]>): Series[] {
  return tables.map(([table, label]) => ({
    label,
    x: column(table, "round"),
    y: column(table, "compromised_wallet_fraction"),
  }));
}

function groupLines(
  table: Table,
  xCol: string,
  yCol: string,
  byCol: string,
  labelOf: (key: string) => string,
  keep: (row: Record<string, string>) => boolean,
): Series[] {
  const xs = column(table, xCol);
  const ys = column(table, yCol);
  const keys = textColumn(table, byCol);
  const extras: Record<string, string[]> = {};
  for (const name of table.header) {
    extras[name] = textColumn(table, name);
  }
  const groups = new Map<string, { x: number[]; y: number[] }>();
  for (let i = 0; i < xs.length; i++) {
    const row: Record<string, string> = {};
    for (const name of table.header) {
      row[name] = extras[name][i];
    }
    if (!keep(row)) {
      continue;
    }
    const key = keys[i];
    if (!groups.has(key)) {
      groups.set(key, { x: [], y: [] });
    }
    const g = groups.get(key)!;
    g.x.push(xs[i]);
    g.y.push(ys[i]);
  }
  return [...groups.entries()]
    .sort(([a], [b]) => Number(a) - Number(b))
    .map(([key, g]) => ({ label: labelOf(key), x: g.x, y: g.y }));
}

/** Mean throughput over shard count, one line per tolerance level F. */
export function throughputSeries(table: Table): Series[] {
  return groupLines(
    table,
    "shard_count",
    "mean_throughput",
    "F",
    (f) => `F=${f}`,
    () => true,
  );
}

/** Mean time to failure over shard count, one line per F (no detector). */
export function mttfSeries(table: Table): Series[] {
  return groupLines(
    table,
    "shard_count",
    "mean_mttf",
    "F",
    (f) => `F=${f}`,
    (row) => row["d"] === "",
  );
}

/** Mean time to failure with a detector, one line per detection delay d. */
export function mttfDetectionSeries(table: Table): Series[] {
  return groupLines(
    table,
    "shard_count",
    "mean_mttf",
    "d",
    (d) => `d=${d}`,
    (row) => row["d"] !== "",
  );
}
