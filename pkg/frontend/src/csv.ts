/** Result rows produced by the memory-experiment CLI. */

import { readFileSync } from "fs";

export interface ResultRow {
  family: string;
  d: number;
  d_eff: number;
  p: number;
  p_sh_ld: number;
  p_sh_st: number;
  p_meas: number;
  shots: number;
  failures_x: number;
  failures_z: number;
  failures: number;
  p_l: number;
  stderr: number;
  seed: number;
}

const NUMERIC: (keyof ResultRow)[] = [
  "d", "d_eff", "p", "p_sh_ld", "p_sh_st", "p_meas", "shots",
  "failures_x", "failures_z", "failures", "p_l", "stderr", "seed",
];

export function parseResultCsv(text: string): ResultRow[] {
  const lines = text.trim().split(/\r?\n/);
  if (lines.length < 2) {
    throw new Error("CSV has no data rows");
  }
  const header = lines[0].split(",");
  const rows: ResultRow[] = [];
  for (const line of lines.slice(1)) {
    if (!line.trim()) continue;
    const parts = line.split(",");
    if (parts.length !== header.length) {
      throw new Error(`malformed CSV row: ${line}`);
    }
    const raw: Record<string, string> = {};
    header.forEach((name, i) => (raw[name] = parts[i]));
    const row = { family: raw.family } as ResultRow;
    for (const key of NUMERIC) {
      const value = Number(raw[key as string]);
      if (!Number.isFinite(value)) {
        throw new Error(`non-numeric field ${key} in row: ${line}`);
      }
      (row as unknown as Record<string, unknown>)[key] = value;
    }
    if (row.p_l < 0 || row.p_l > 1 || row.stderr < 0) {
      throw new Error(`out-of-range row: ${line}`);
    }
    rows.push(row);
  }
  return rows;
}

export function readResultCsv(path: string): ResultRow[] {
  return parseResultCsv(readFileSync(path, "utf-8"));
}

export function families(rows: ResultRow[]): string[] {
  return [...new Set(rows.map((r) => r.family))].sort();
}

export function distances(rows: ResultRow[]): number[] {
  return [...new Set(rows.map((r) => r.d))].sort((a, b) => a - b);
}
