/**
 * Reader for the CRP dataset format produced by the PUF simulator:
 * one CRP per line, 322 hex characters (160 bytes of the vector a followed
 * by the byte b), a comma and the plaintext response bit.
 *
 * Rows are kept as raw bytes (161 per CRP); feature matrices are expanded
 * per minibatch to keep memory flat for large datasets.
 */

import { readFileSync } from "node:fs";

export const VECTOR_BYTES = 161;
export const BINARY_FEATURES = VECTOR_BYTES * 8; // 1288 challenge bits

export type InputFormat = "binary" | "real";

export interface Dataset {
  rows: Uint8Array; // count * 161 bytes
  labels: Uint8Array; // count
  count: number;
}

export class DatasetError extends Error {
  constructor(file: string, line: number, reason: string) {
    super(`${file}:${line}: ${reason}`);
  }
}

const HEX_CHARS = VECTOR_BYTES * 2;

export function parseLine(line: string, file: string, lineNo: number): { bytes: Uint8Array; label: number } {
  if (line.length !== HEX_CHARS + 2 || line[HEX_CHARS] !== ",") {
    throw new DatasetError(file, lineNo, `malformed CRP line (length ${line.length})`);
  }
  const label = line.charCodeAt(HEX_CHARS + 1) - 48;
  if (label !== 0 && label !== 1) {
    throw new DatasetError(file, lineNo, `label must be 0 or 1`);
  }
  const bytes = new Uint8Array(VECTOR_BYTES);
  for (let i = 0; i < VECTOR_BYTES; i++) {
    const hi = parseInt(line[2 * i], 16);
    const lo = parseInt(line[2 * i + 1], 16);
    if (Number.isNaN(hi) || Number.isNaN(lo)) {
      throw new DatasetError(file, lineNo, "invalid hex digit");
    }
    bytes[i] = hi * 16 + lo;
  }
  return { bytes, label };
}

export function loadDataset(path: string, limit?: number): Dataset {
  const text = readFileSync(path, "utf8");
  const lines = text.split("\n");
  const rowsOut: Uint8Array[] = [];
  const labels: number[] = [];
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line) continue;
    const { bytes, label } = parseLine(line, path, i + 1);
    rowsOut.push(bytes);
    labels.push(label);
    if (limit !== undefined && rowsOut.length >= limit) break;
  }
  const rows = new Uint8Array(rowsOut.length * VECTOR_BYTES);
  rowsOut.forEach((r, i) => rows.set(r, i * VECTOR_BYTES));
  return { rows, labels: Uint8Array.from(labels), count: rowsOut.length };
}

/** Serialize rows back to the wire format (testing aid; must round-trip). */
export function formatLine(bytes: Uint8Array, label: number): string {
  let hex = "";
  for (let i = 0; i < bytes.length; i++) {
    hex += bytes[i].toString(16).padStart(2, "0");
  }
  return `${hex},${label}`;
}

export function featureWidth(format: InputFormat): number {
  return format === "binary" ? BINARY_FEATURES : VECTOR_BYTES;
}

/**
 * Expand dataset rows [start, end) into a feature matrix.
 * binary: the 1288 challenge bits (LSB-first per byte) mapped to -1/+1.
 * real:   the 161 byte values scaled to [-1, 1].
 */
export function expandFeatures(
  ds: Dataset,
  start: number,
  end: number,
  format: InputFormat,
  out?: Float32Array,
): Float32Array {
  const width = featureWidth(format);
  const n = end - start;
  const X = out ?? new Float32Array(n * width);
  for (let r = 0; r < n; r++) {
    const base = (start + r) * VECTOR_BYTES;
    const dst = r * width;
    if (format === "binary") {
      for (let byte = 0; byte < VECTOR_BYTES; byte++) {
        const v = ds.rows[base + byte];
        const o = dst + byte * 8;
        for (let bit = 0; bit < 8; bit++) {
          X[o + bit] = (v >> bit) & 1 ? 1.0 : -1.0;
        }
      }
    } else {
      for (let byte = 0; byte < VECTOR_BYTES; byte++) {
        X[dst + byte] = (ds.rows[base + byte] - 127.5) / 127.5;
      }
    }
  }
  return X;
}
