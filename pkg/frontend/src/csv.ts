/**
 * Parser for cellwatch result tables.
 *
 * Format: an optional `# meta {...json...}` first line, a comma-separated
 * header row, then one row per record. Values are kept as strings; use
 * `numericColumn` to coerce.
 */

export interface Table {
  meta: Record<string, unknown>;
  columns: string[];
  rows: Record<string, string>[];
}

export class TableError extends Error {}

export function parseTable(text: string): Table {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  let meta: Record<string, unknown> = {};
  let start = 0;
  const first = lines[0];
  if (first === undefined) {
    throw new TableError("empty table: no header row");
  }
  if (first.startsWith("# meta ")) {
    try {
      meta = JSON.parse(first.slice("# meta ".length)) as Record<string, unknown>;
    } catch (err) {
      throw new TableError(`malformed metadata line: ${(err as Error).message}`);
    }
    start = 1;
  }
  const header = lines[start];
  if (header === undefined) {
    throw new TableError("empty table: no header row");
  }
  const columns = header.split(",");
  const rows: Record<string, string>[] = [];
  for (const line of lines.slice(start + 1)) {
    const cells = line.split(",");
    const row: Record<string, string> = {};
    columns.forEach((column, i) => {
      row[column] = cells[i] ?? "";
    });
    rows.push(row);
  }
  return { meta, columns, rows };
}

/** Ensure every named column exists; report all missing ones at once. */
export function requireColumns(table: Table, names: string[]): void {
  const missing = names.filter((name) => !table.columns.includes(name));
  if (missing.length > 0) {
    throw new TableError(`missing required columns: ${missing.join(", ")}`);
  }
  if (table.rows.length === 0) {
    throw new TableError("table has no data rows");
  }
}

export function numericColumn(table: Table, name: string): number[] {
  return table.rows.map((row, index) => {
    const value = Number(row[name]);
    if (!Number.isFinite(value)) {
      throw new TableError(`row ${index + 1}: column ${name} is not numeric: ${row[name]}`);
    }
    return value;
  });
}

/** Distinct values of a column, in first-appearance order. */
export function distinct(table: Table, name: string): string[] {
  const seen = new Set<string>();
  const out: string[] = [];
  for (const row of table.rows) {
    const value = row[name] ?? "";
    if (!seen.has(value)) {
      seen.add(value);
      out.push(value);
    }
  }
  return out;
}
