import { readFileSync } from 'fs';
import { join } from 'path';
import { parse as parseCSV } from 'papaparse';

export class BundleError extends Error {}

export interface RunEntry {
  epsilon: number;
  seed: number;
  trace: string;
  status: string;
}

export interface Manifest {
  tool: string;
  version: string;
  mode: string;
  runs: RunEntry[];
}

export interface SummaryRow {
  epsilon: number;
  seed: number;
  steadyStateError: number;
  conditionValue: number;
  theoremBound: number | null;
  gap: number | null;
}

export interface TracePoint {
  k: number;
  errX: number;
}

export const SUMMARY_HEADER = [
  'epsilon',
  'seed',
  'steady_state_error',
  'condition_value',
  'theorem_bound',
  'gap',
];

export const TRACE_HEADER = ['k', 'err_x', 'gap_f', 'grad_norm', 'g_norm', 'grad_err', 'phi', 'queries'];

function readText(path: string): string {
  try {
    return readFileSync(path, 'utf8');
  } catch (err) {
    throw new BundleError(`cannot read ${path}: ${(err as Error).message}`);
  }
}

function parseRows(path: string, expectedHeader: string[]): Record<string, string>[] {
  const parsed = parseCSV<Record<string, string>>(readText(path).trim(), { header: true });
  if (parsed.errors.length > 0) {
    throw new BundleError(`malformed CSV in ${path}: ${parsed.errors[0].message}`);
  }
  const fields = parsed.meta.fields ?? [];
  if (fields.join(',') !== expectedHeader.join(',')) {
    throw new BundleError(
      `schema mismatch in ${path}: expected [${expectedHeader.join(', ')}], got [${fields.join(', ')}]`,
    );
  }
  return parsed.data;
}

function toNumber(raw: string, field: string, path: string): number {
  const value = Number(raw);
  if (raw === '' || !Number.isFinite(value)) {
    throw new BundleError(`non-numeric ${field} value ${JSON.stringify(raw)} in ${path}`);
  }
  return value;
}

export function loadManifest(bundleDir: string): Manifest {
  const path = join(bundleDir, 'manifest.json');
  let doc: unknown;
  try {
    doc = JSON.parse(readText(path));
  } catch (err) {
    if (err instanceof BundleError) throw err;
    throw new BundleError(`malformed JSON in ${path}: ${(err as Error).message}`);
  }
  const manifest = doc as Manifest;
  if (!manifest || !Array.isArray(manifest.runs)) {
    throw new BundleError(`${path} is missing the runs index`);
  }
  return manifest;
}

export function loadSummary(bundleDir: string): SummaryRow[] {
  const path = join(bundleDir, 'summary.csv');
  return parseRows(path, SUMMARY_HEADER).map((row) => ({
    epsilon: toNumber(row.epsilon, 'epsilon', path),
    seed: toNumber(row.seed, 'seed', path),
    steadyStateError: toNumber(row.steady_state_error, 'steady_state_error', path),
    conditionValue: toNumber(row.condition_value, 'condition_value', path),
    theoremBound: row.theorem_bound === '' ? null : toNumber(row.theorem_bound, 'theorem_bound', path),
    gap: row.gap === '' ? null : toNumber(row.gap, 'gap', path),
  }));
}

export function loadTrace(bundleDir: string, relPath: string): TracePoint[] {
  const path = join(bundleDir, relPath);
  return parseRows(path, TRACE_HEADER).map((row) => ({
    k: toNumber(row.k, 'k', path),
    errX: toNumber(row.err_x, 'err_x', path),
  }));
}
