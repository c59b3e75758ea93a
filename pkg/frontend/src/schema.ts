import { readFileSync } from "node:fs";
import { parse } from "csv-parse/sync";

export const SCHEMA = "modzero/1";

export class SchemaError extends Error {}

export type Row = Record<string, string>;

/** Read a CSV produced by the compute CLI; every row must carry the schema marker. */
export function readCsv(path: string): Row[] {
  const text = readFileSync(path, "utf-8");
  const rows: Row[] = parse(text, { columns: true, skip_empty_lines: true });
  for (const row of rows) {
    if (row["schema"] !== SCHEMA) {
      throw new SchemaError(
        `expected schema ${SCHEMA} in ${path}, got ${JSON.stringify(row["schema"])}`,
      );
    }
  }
  return rows;
}

/** Read a JSON output; the top-level object must carry the schema marker. */
export function readJson(path: string): Record<string, unknown> {
  const obj = JSON.parse(readFileSync(path, "utf-8"));
  if (typeof obj !== "object" || obj === null || (obj as Row)["schema"] !== SCHEMA) {
    throw new SchemaError(`expected schema ${SCHEMA} in ${path}`);
  }
  return obj as Record<string, unknown>;
}
