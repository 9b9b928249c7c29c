// Trace and summary file contract.
//
// This package never imports solver code; everything it knows about a run
// arrives through two files written by the experiment CLI:
//
//   {name}.csv           per-iteration trace, header t,F,g,d,gamma,delta,h
//   {name}.summary.json  run metadata: set/objective descriptors, rule,
//                        fit diagnostics, and (for 2-d runs) the trajectory
//
// CSV float fields are shortest round-trip decimals; non-finite values are
// written as the empty string.  The JSON side maps non-finite to null.

import { readFileSync } from "node:fs";

export const TRACE_HEADER = ["t", "F", "g", "d", "gamma", "delta", "h"] as const;

export interface TraceRow {
  t: number;
  F: number;
  g: number;
  d: number;
  gamma: number;
  delta: number;
  h: number;
}

export class SchemaError extends Error {}

// ----------------------------------------------------------------------
// trace CSV

function parseField(raw: string, line: number, col: string): number {
  if (raw === "") return NaN; // writer's encoding for non-finite
  const v = Number(raw);
  if (raw.trim() === "" || Number.isNaN(v)) {
    throw new SchemaError(`line ${line}: field '${col}' is not a number: '${raw}'`);
  }
  return v;
}

export function parseTraceCsv(text: string): TraceRow[] {
  const lines = text.split(/\r?\n/);
  while (lines.length > 0 && lines[lines.length - 1] === "") lines.pop();
  if (lines.length === 0) throw new SchemaError("empty trace file");
  if (lines[0] !== TRACE_HEADER.join(",")) {
    throw new SchemaError(`bad header: expected '${TRACE_HEADER.join(",")}', got '${lines[0]}'`);
  }
  const rows: TraceRow[] = [];
  let prevT = -1;
  for (let i = 1; i < lines.length; i++) {
    const parts = (lines[i] ?? "").split(",");
    if (parts.length !== TRACE_HEADER.length) {
      throw new SchemaError(`line ${i + 1}: expected ${TRACE_HEADER.length} fields, got ${parts.length}`);
    }
    const [tRaw, FRaw, gRaw, dRaw, gammaRaw, deltaRaw, hRaw] = parts as [
      string, string, string, string, string, string, string,
    ];
    const t = parseField(tRaw, i + 1, "t");
    if (!Number.isInteger(t) || t < 0) {
      throw new SchemaError(`line ${i + 1}: t must be a nonnegative integer, got '${tRaw}'`);
    }
    if (t <= prevT) {
      throw new SchemaError(`line ${i + 1}: t must be strictly increasing (${t} after ${prevT})`);
    }
    prevT = t;
    rows.push({
      t,
      F: parseField(FRaw, i + 1, "F"),
      g: parseField(gRaw, i + 1, "g"),
      d: parseField(dRaw, i + 1, "d"),
      gamma: parseField(gammaRaw, i + 1, "gamma"),
      delta: parseField(deltaRaw, i + 1, "delta"),
      h: parseField(hRaw, i + 1, "h"),
    });
  }
  return rows;
}

function fmtField(v: number): string {
  // JS shortest round-trip; the textual form may differ from the writer's
  // (1e-7 vs 1e-07) but the parsed value is bit-identical either way.
  return Number.isFinite(v) ? String(v) : "";
}

export function serializeTraceCsv(rows: readonly TraceRow[]): string {
  const out = [TRACE_HEADER.join(",")];
  for (const r of rows) {
    out.push(
      [String(r.t), fmtField(r.F), fmtField(r.g), fmtField(r.d), fmtField(r.gamma), fmtField(r.delta), fmtField(r.h)].join(","),
    );
  }
  return out.join("\n") + "\n";
}

// ----------------------------------------------------------------------
// summary JSON

export type SetDescriptor =
  | { kind: "l2ball"; center: number[]; radius: number }
  | { kind: "lpball"; center: number[]; radius: number; p: number }
  | { kind: "simplex"; dim: number }
  | { kind: "box"; lo: number[]; hi: number[] }
  | { kind: "ellipsoid"; center: number[]; axes: number[][] }
  | { kind: "polytope"; vertices: number[][] }
  | { kind: "capsule"; p: number[]; q: number[]; radius: number }
  | { kind: "stadium"; half_length: number }
  | { kind: "truncated_disk"; b: number }
  | { kind: "superflat"; scale: number };

export type ObjectiveDescriptor =
  | { kind: "quadratic"; Q: number[][]; c: number[] }
  | { kind: "linear"; c: number[]; L: number }
  | { kind: "distance_power"; anchor: number[]; r: number; L: number }
  | { kind: "stadium_psi"; c: number };

export interface FinalRecord {
  t: number;
  F: number | null;
  g: number | null;
  d: number | null;
  gamma: number | null;
  delta: number | null;
  h: number | null;
}

export interface FitInfo {
  slope: number | null;
  intercept: number | null;
  residual: number | null;
  n_points: number;
  window: [number, number];
  converged_at: number | null;
}

export interface RunSummary {
  name: string;
  set: SetDescriptor;
  objective: ObjectiveDescriptor;
  rule: { label: string; [key: string]: unknown };
  t_max: number;
  stopped_at: number;
  gap_tol: number | null;
  ell: number | null;
  L: number;
  diameter: number;
  f_star: number | null;
  full_resolution: boolean;
  n_records: number;
  trace_csv: string;
  tolerances: { check: number; feasibility: number };
  max_envelope_violation: number;
  max_descent_violation: number;
  final: FinalRecord;
  fit: FitInfo | null;
  h_decay: Record<string, unknown> | null;
  /** Present only for 2-d runs: downsampled [t, x, y] rows. */
  trajectory?: [number, number, number][];
  /** Present only for 2-d runs. */
  x0?: number[];
}

function requireKey(obj: Record<string, unknown>, key: string, where: string): unknown {
  if (!(key in obj)) throw new SchemaError(`${where}: missing key '${key}'`);
  return obj[key];
}

export function parseRunSummary(text: string, where = "summary"): RunSummary {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (e) {
    throw new SchemaError(`${where}: invalid JSON: ${(e as Error).message}`);
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new SchemaError(`${where}: expected a JSON object`);
  }
  const obj = raw as Record<string, unknown>;
  for (const key of ["name", "set", "objective", "rule", "final", "n_records"]) {
    requireKey(obj, key, where);
  }
  const set = obj["set"] as Record<string, unknown>;
  const objective = obj["objective"] as Record<string, unknown>;
  const rule = obj["rule"] as Record<string, unknown>;
  if (typeof set?.["kind"] !== "string") throw new SchemaError(`${where}: set.kind missing`);
  if (typeof objective?.["kind"] !== "string") throw new SchemaError(`${where}: objective.kind missing`);
  if (typeof rule?.["label"] !== "string") throw new SchemaError(`${where}: rule.label missing`);
  const traj = obj["trajectory"];
  if (traj !== undefined) {
    if (!Array.isArray(traj) || traj.some((r) => !Array.isArray(r) || r.length !== 3)) {
      throw new SchemaError(`${where}: trajectory must be an array of [t, x, y] rows`);
    }
  }
  return obj as unknown as RunSummary;
}

export function readTraceFile(path: string): TraceRow[] {
  return parseTraceCsv(readFileSync(path, "utf8"));
}

export function readSummaryFile(path: string): RunSummary {
  return parseRunSummary(readFileSync(path, "utf8"), path);
}
