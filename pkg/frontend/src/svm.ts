/**
 * Kernel SVM with an RBF kernel, trained by kernelized Pegasos.
 *
 * The Gram matrix is materialized, so training is capped (default 4000
 * rows); that is plenty to model anything a linear-threshold PUF produces
 * and keeps the bench usable without native BLAS.
 */

import { Dataset, InputFormat, expandFeatures, featureWidth } from "./dataset.js";
import { makeRng } from "./rng.js";

export interface SvmConfig {
  inputFormat: InputFormat;
  gamma?: number; // default 1 / featureWidth
  lambda: number;
  iterations: number;
  trainCap: number;
  seed: number;
}

export const SVM_DEFAULTS: SvmConfig = {
  inputFormat: "binary",
  lambda: 1e-4,
  iterations: 40_000,
  trainCap: 4000,
  seed: 1,
};

function gram(X: Float32Array, n: number, d: number, gamma: number,
              Y?: Float32Array, m?: number): Float32Array {
  // K[i,j] = exp(-gamma * |x_i - y_j|^2), via squared norms and dot products
  const rows = Y ?? X;
  const nRows = m ?? n;
  const out = new Float32Array(n * nRows);
  const nx = new Float32Array(n);
  const ny = new Float32Array(nRows);
  for (let i = 0; i < n; i++) {
    let acc = 0;
    for (let k = 0; k < d; k++) acc += X[i * d + k] * X[i * d + k];
    nx[i] = acc;
  }
  for (let j = 0; j < nRows; j++) {
    let acc = 0;
    for (let k = 0; k < d; k++) acc += rows[j * d + k] * rows[j * d + k];
    ny[j] = acc;
  }
  for (let i = 0; i < n; i++) {
    const xo = i * d;
    for (let j = 0; j < nRows; j++) {
      const yo = j * d;
      let dot = 0;
      for (let k = 0; k < d; k++) dot += X[xo + k] * rows[yo + k];
      out[i * nRows + j] = Math.exp(-gamma * (nx[i] + ny[j] - 2 * dot));
    }
  }
  return out;
}

export interface SvmResult {
  error: number;
  trainSize: number;
  testSize: number;
}

export function trainSvm(ds: Dataset, cfg: SvmConfig): SvmResult {
  const d = featureWidth(cfg.inputFormat);
  const gamma = cfg.gamma ?? 1 / d;
  const testSize = Math.min(Math.floor(ds.count * 0.2), cfg.trainCap);
  const trainSize = Math.min(ds.count - testSize, cfg.trainCap);
  const Xtr = expandFeatures(ds, 0, trainSize, cfg.inputFormat);
  const K = gram(Xtr, trainSize, d, gamma);
  const y = new Float32Array(trainSize);
  for (let i = 0; i < trainSize; i++) y[i] = ds.labels[i] ? 1 : -1;

  // kernelized Pegasos: alpha counts margin violations per training point
  const alpha = new Float32Array(trainSize);
  const rng = makeRng(cfg.seed);
  for (let t = 1; t <= cfg.iterations; t++) {
    const i = Math.floor(rng() * trainSize);
    let margin = 0;
    const ko = i * trainSize;
    for (let j = 0; j < trainSize; j++) {
      if (alpha[j] !== 0) margin += alpha[j] * y[j] * K[ko + j];
    }
    margin *= y[i] / (cfg.lambda * t);
    if (margin < 1) alpha[i] += 1;
  }

  const testStart = ds.count - testSize;
  const Xte = expandFeatures(ds, testStart, ds.count, cfg.inputFormat);
  const Kte = gram(Xte, testSize, d, gamma, Xtr, trainSize);
  let wrong = 0;
  for (let i = 0; i < testSize; i++) {
    let score = 0;
    const ko = i * trainSize;
    for (let j = 0; j < trainSize; j++) {
      if (alpha[j] !== 0) score += alpha[j] * y[j] * Kte[ko + j];
    }
    const pred = score > 0 ? 1 : 0;
    if (pred !== ds.labels[testStart + i]) wrong += 1;
  }
  return { error: wrong / testSize, trainSize, testSize };
}
