import { readFileSync } from "node:fs";
import { parse } from "papaparse";

export interface CsvTable {
  path: string;
  columns: string[];
  rows: Record<string, string>[];
}

export function readCsv(path: string): CsvTable {
  const text = readFileSync(path, "utf8");
  const parsed = parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  const fatal = parsed.errors.find((e) => e.code !== "TooFewFields" && e.code !== "TooManyFields");
  if (fatal) {
    throw new Error(`malformed CSV ${path}: ${fatal.message}`);
  }
  const columns = parsed.meta.fields ?? [];
  if (parsed.data.length === 0) {
    throw new Error(`empty CSV: ${path} contains no data rows`);
  }
  return { path, columns, rows: parsed.data };
}

export function requireColumns(table: CsvTable, required: string[]): void {
  for (const name of required) {
    if (!table.columns.includes(name)) {
      throw new Error(
        `missing required column '${name}' in ${table.path} ` +
          `(found: ${table.columns.join(", ") || "none"})`,
      );
    }
  }
}

/** Column as floats; blank cells become NaN so callers can drop them. */
export function numericColumn(table: CsvTable, name: string): number[] {
  return table.rows.map((row) => {
    const cell = row[name];
    return cell === undefined || cell === "" ? NaN : Number(cell);
  });
}
