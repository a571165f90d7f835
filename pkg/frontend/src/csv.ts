/** Strict CSV handling for the runner's aggregate outputs. */

export interface Table {
  file: string;
  header: string[];
  rows: string[][];
}

export class MissingColumnError extends Error {
  constructor(column: string, file: string) {
    super(`missing column "${column}" in ${file}`);
    this.name = "MissingColumnError";
  }
}

export class EmptyCsvError extends Error {
  constructor(file: string) {
    super(`no data rows in ${file}`);
    this.name = "EmptyCsvError";
  }
}

export function parseCsv(text: string, file: string): Table {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length < 2) {
    throw new EmptyCsvError(file);
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((l) => l.split(","));
  return { file, header, rows };
}

/** Numeric column by name; throws naming the column and file when absent. */
export function column(table: Table, name: string): number[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new MissingColumnError(name, table.file);
  }
  return table.rows.map((r) => Number(r[idx]));
}

/** String column by name, same error contract. */
export function textColumn(table: Table, name: string): string[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new MissingColumnError(name, table.file);
  }
  return table.rows.map((r) => r[idx]);
}
