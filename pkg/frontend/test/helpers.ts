/** Shared test data builders. */

import { Dataset, VECTOR_BYTES, formatLine } from "../src/dataset.js";
import { makeRng } from "../src/rng.js";

/**
 * Linear-threshold toy PUF in the exporter's row layout: the response is
 * the sign of a +-1-weighted sum over the first `stages` challenge bits.
 * Mirrors the toy dataset the simulator exports for attacker validation.
 */
export function makeToyDataset(count: number, seed: number, stages = 32): Dataset {
  const rng = makeRng(seed);
  const weights: number[] = [];
  for (let i = 0; i < stages; i++) weights.push(rng() < 0.5 ? -1 : 1);
  const rows = new Uint8Array(count * VECTOR_BYTES);
  const labels = new Uint8Array(count);
  for (let r = 0; r < count; r++) {
    let acc = 0;
    for (let byte = 0; byte < VECTOR_BYTES; byte++) {
      const v = Math.floor(rng() * 256);
      rows[r * VECTOR_BYTES + byte] = v;
      if (byte * 8 < stages) {
        for (let bit = 0; bit < 8 && byte * 8 + bit < stages; bit++) {
          const x = (v >> bit) & 1 ? 1 : -1;
          acc += weights[byte * 8 + bit] * x;
        }
      }
    }
    labels[r] = acc > 0 ? 1 : 0;
  }
  return { rows, labels, count };
}

export function datasetToCsv(ds: Dataset): string {
  const lines: string[] = [];
  for (let i = 0; i < ds.count; i++) {
    lines.push(formatLine(ds.rows.subarray(i * VECTOR_BYTES, (i + 1) * VECTOR_BYTES),
                          ds.labels[i]));
  }
  return lines.join("\n") + "\n";
}
