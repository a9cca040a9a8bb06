/**
 * Readers for the simulator's CSV outputs.
 *
 * Column layouts are fixed and column order is part of the format, so the
 * header is checked verbatim before any row is touched. All errors carry the
 * file path plus the offending column (and row, where one exists) so a schema
 * mismatch is diagnosable from the message alone.
 */
import { readFileSync } from "node:fs";
import Papa from "papaparse";

export class SchemaError extends Error {
  constructor(
    message: string,
    readonly path: string,
    readonly column?: string,
  ) {
    super(`${path}: ${message}`);
    this.name = "SchemaError";
  }
}

export const FAR_SPECTRUM_COLUMNS = ["theta_rad", "value"] as const;
export const NEAR_SPECTRUM_COLUMNS = ["d_m", "theta_rad", "value"] as const;
export const TRUTH_COLUMNS = [
  "trial", "cluster", "field", "x_m", "y_m", "d_m", "theta_deg",
] as const;
export const SWEEP_COLUMNS = [
  "axis", "value", "method",
  "p_md_near", "p_md_far", "p_fa_near", "p_fa_far",
  "near_targets", "far_targets", "near_estimates", "far_estimates",
  "near_missed", "far_missed", "near_false", "far_false",
  "seconds",
] as const;
export const GRID_COLUMNS = [
  "cluster", "window_lo_m", "window_hi_m",
  "near_full", "near_kept", "far_full", "far_kept",
] as const;

export interface FarSpectrumRow {
  theta_rad: number;
  value: number;
}

export interface NearSpectrumRow {
  d_m: number;
  theta_rad: number;
  value: number;
}

export interface TruthRow {
  trial: number;
  cluster: number;
  field: "near" | "far";
  x_m: number;
  y_m: number;
  d_m: number;
  theta_deg: number;
}

export interface SweepRow {
  axis: string;
  value: string;
  method: string;
  /** Undefined probabilities are written as empty cells; kept as null. */
  p_md_near: number | null;
  p_md_far: number | null;
  p_fa_near: number | null;
  p_fa_far: number | null;
  seconds: number;
}

export interface GridRow {
  cluster: number;
  window_lo_m: number;
  window_hi_m: number;
  near_full: number;
  near_kept: number;
  far_full: number;
  far_kept: number;
}

interface RawTable {
  header: string[];
  rows: string[][];
}

function readTable(path: string, expected: readonly string[]): RawTable {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    throw new SchemaError(`cannot read file (${(err as Error).message})`, path);
  }
  // The delimiter is part of the format; auto-detection chokes on
  // single-column files.
  const parsed = Papa.parse<string[]>(text.trim(), {
    delimiter: ",",
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0]!;
    throw new SchemaError(`CSV parse error: ${first.message}`, path);
  }
  const [header, ...rows] = parsed.data;
  if (!header) {
    throw new SchemaError("empty file, expected a header row", path);
  }
  for (const column of expected) {
    if (!header.includes(column)) {
      throw new SchemaError(`missing column '${column}'`, path, column);
    }
  }
  for (const column of header) {
    if (!expected.includes(column)) {
      throw new SchemaError(`unexpected column '${column}'`, path, column);
    }
  }
  if (header.some((c, i) => c !== expected[i])) {
    throw new SchemaError(
      `column order must be [${expected.join(", ")}], found [${header.join(", ")}]`,
      path,
    );
  }
  for (const [i, row] of rows.entries()) {
    if (row.length !== expected.length) {
      throw new SchemaError(
        `row ${i + 2} has ${row.length} cells, expected ${expected.length}`,
        path,
      );
    }
  }
  return { header, rows };
}

function numberCell(
  path: string, row: string[], rowIndex: number,
  columns: readonly string[], column: string,
): number {
  const raw = row[columns.indexOf(column)]!;
  const value = Number(raw);
  if (raw === "" || !Number.isFinite(value)) {
    throw new SchemaError(
      `row ${rowIndex + 2}, column '${column}': expected a number, found '${raw}'`,
      path, column,
    );
  }
  return value;
}

/** Like numberCell but maps the format's empty cell to null. */
function probabilityCell(
  path: string, row: string[], rowIndex: number,
  columns: readonly string[], column: string,
): number | null {
  const raw = row[columns.indexOf(column)]!;
  if (raw === "") return null;
  const value = Number(raw);
  if (!Number.isFinite(value)) {
    throw new SchemaError(
      `row ${rowIndex + 2}, column '${column}': expected a number or empty, found '${raw}'`,
      path, column,
    );
  }
  return value;
}

export function readFarSpectrum(path: string): FarSpectrumRow[] {
  const { rows } = readTable(path, FAR_SPECTRUM_COLUMNS);
  return rows.map((row, i) => ({
    theta_rad: numberCell(path, row, i, FAR_SPECTRUM_COLUMNS, "theta_rad"),
    value: numberCell(path, row, i, FAR_SPECTRUM_COLUMNS, "value"),
  }));
}

export function readNearSpectrum(path: string): NearSpectrumRow[] {
  const { rows } = readTable(path, NEAR_SPECTRUM_COLUMNS);
  return rows.map((row, i) => ({
    d_m: numberCell(path, row, i, NEAR_SPECTRUM_COLUMNS, "d_m"),
    theta_rad: numberCell(path, row, i, NEAR_SPECTRUM_COLUMNS, "theta_rad"),
    value: numberCell(path, row, i, NEAR_SPECTRUM_COLUMNS, "value"),
  }));
}

export function readTruth(path: string): TruthRow[] {
  const { rows } = readTable(path, TRUTH_COLUMNS);
  return rows.map((row, i) => {
    const field = row[TRUTH_COLUMNS.indexOf("field")]!;
    if (field !== "near" && field !== "far") {
      throw new SchemaError(
        `row ${i + 2}, column 'field': expected 'near' or 'far', found '${field}'`,
        path, "field",
      );
    }
    return {
      trial: numberCell(path, row, i, TRUTH_COLUMNS, "trial"),
      cluster: numberCell(path, row, i, TRUTH_COLUMNS, "cluster"),
      field,
      x_m: numberCell(path, row, i, TRUTH_COLUMNS, "x_m"),
      y_m: numberCell(path, row, i, TRUTH_COLUMNS, "y_m"),
      d_m: numberCell(path, row, i, TRUTH_COLUMNS, "d_m"),
      theta_deg: numberCell(path, row, i, TRUTH_COLUMNS, "theta_deg"),
    };
  });
}

export function readSweep(path: string): SweepRow[] {
  const { rows } = readTable(path, SWEEP_COLUMNS);
  return rows.map((row, i) => ({
    axis: row[SWEEP_COLUMNS.indexOf("axis")]!,
    value: row[SWEEP_COLUMNS.indexOf("value")]!,
    method: row[SWEEP_COLUMNS.indexOf("method")]!,
    p_md_near: probabilityCell(path, row, i, SWEEP_COLUMNS, "p_md_near"),
    p_md_far: probabilityCell(path, row, i, SWEEP_COLUMNS, "p_md_far"),
    p_fa_near: probabilityCell(path, row, i, SWEEP_COLUMNS, "p_fa_near"),
    p_fa_far: probabilityCell(path, row, i, SWEEP_COLUMNS, "p_fa_far"),
    seconds: numberCell(path, row, i, SWEEP_COLUMNS, "seconds"),
  }));
}

export function readGridSizes(path: string): GridRow[] {
  const { rows } = readTable(path, GRID_COLUMNS);
  return rows.map((row, i) => ({
    cluster: numberCell(path, row, i, GRID_COLUMNS, "cluster"),
    window_lo_m: numberCell(path, row, i, GRID_COLUMNS, "window_lo_m"),
    window_hi_m: numberCell(path, row, i, GRID_COLUMNS, "window_hi_m"),
    near_full: numberCell(path, row, i, GRID_COLUMNS, "near_full"),
    near_kept: numberCell(path, row, i, GRID_COLUMNS, "near_kept"),
    far_full: numberCell(path, row, i, GRID_COLUMNS, "far_full"),
    far_kept: numberCell(path, row, i, GRID_COLUMNS, "far_kept"),
  }));
}
