/**
 * Minibatch MLP with ReLU hidden layers, a sigmoid output and the Adam
 * optimizer.  Written against flat Float32Arrays with blocked matrix loops;
 * large attack runs are compute-bound here, not in the dataset plumbing.
 */

import { gaussian, makeRng, shuffle } from "./rng.js";
import { Dataset, InputFormat, expandFeatures, featureWidth } from "./dataset.js";

export interface MlpConfig {
  hiddenLayers: number;
  neuronsPerLayer: number;
  inputFormat: InputFormat;
  epochs: number;
  batchSize: number;
  learningRate: number;
  seed: number;
  weightDecay?: number;
}

export const MLP_DEFAULTS = {
  epochs: 200, // reference configuration; desk-scale runs pass fewer
  batchSize: 128,
  learningRate: 1e-3,
  seed: 1,
  // decoupled weight decay: with mostly-uninformative challenge bits the
  // optimizer otherwise keeps noise weights alive
  weightDecay: 1e-4,
};

/** C = A(BxK) @ W(KxN) + bias, blocked i-k-j loops. */
function affine(A: Float32Array, B: number, K: number, W: Float32Array, N: number,
                bias: Float32Array, C: Float32Array): void {
  for (let i = 0; i < B; i++) {
    const co = i * N;
    for (let j = 0; j < N; j++) C[co + j] = bias[j];
    const ao = i * K;
    for (let k = 0; k < K; k++) {
      const a = A[ao + k];
      if (a === 0) continue;
      const wo = k * N;
      for (let j = 0; j < N; j++) C[co + j] += a * W[wo + j];
    }
  }
}

/** dA = dC @ W^T */
function backData(dC: Float32Array, B: number, N: number, W: Float32Array, K: number,
                  dA: Float32Array): void {
  dA.fill(0, 0, B * K);
  for (let i = 0; i < B; i++) {
    const co = i * N;
    const ao = i * K;
    for (let k = 0; k < K; k++) {
      const wo = k * N;
      let acc = 0;
      for (let j = 0; j < N; j++) acc += dC[co + j] * W[wo + j];
      dA[ao + k] = acc;
    }
  }
}

/** dW += A^T @ dC ; dbias += column sums of dC */
function backWeights(A: Float32Array, B: number, K: number, dC: Float32Array, N: number,
                     dW: Float32Array, dBias: Float32Array): void {
  dW.fill(0);
  dBias.fill(0);
  for (let i = 0; i < B; i++) {
    const ao = i * K;
    const co = i * N;
    for (let j = 0; j < N; j++) dBias[j] += dC[co + j];
    for (let k = 0; k < K; k++) {
      const a = A[ao + k];
      if (a === 0) continue;
      const wo = k * N;
      for (let j = 0; j < N; j++) dW[wo + j] += a * dC[co + j];
    }
  }
}

interface AdamState {
  m: Float32Array;
  v: Float32Array;
}

export class Mlp {
  readonly sizes: number[];
  private weights: Float32Array[] = [];
  private biases: Float32Array[] = [];
  private adamW: AdamState[] = [];
  private adamB: AdamState[] = [];
  private step = 0;

  constructor(inputWidth: number, hiddenLayers: number, neurons: number, seed: number) {
    this.sizes = [inputWidth, ...Array(hiddenLayers).fill(neurons), 1];
    const rng = makeRng(seed);
    for (let l = 0; l + 1 < this.sizes.length; l++) {
      const fanIn = this.sizes[l];
      const fanOut = this.sizes[l + 1];
      const scale = Math.sqrt(2.0 / fanIn); // He init for ReLU stacks
      const W = new Float32Array(fanIn * fanOut);
      for (let i = 0; i < W.length; i++) W[i] = gaussian(rng) * scale;
      this.weights.push(W);
      this.biases.push(new Float32Array(fanOut));
      this.adamW.push({ m: new Float32Array(W.length), v: new Float32Array(W.length) });
      this.adamB.push({ m: new Float32Array(fanOut), v: new Float32Array(fanOut) });
    }
  }

  /** Forward pass; returns per-layer activations (input first). */
  private forward(X: Float32Array, batch: number): Float32Array[] {
    const acts: Float32Array[] = [X];
    for (let l = 0; l + 1 < this.sizes.length; l++) {
      const out = new Float32Array(batch * this.sizes[l + 1]);
      affine(acts[l], batch, this.sizes[l], this.weights[l], this.sizes[l + 1],
             this.biases[l], out);
      if (l + 2 < this.sizes.length) {
        for (let i = 0; i < out.length; i++) if (out[i] < 0) out[i] = 0; // ReLU
      }
      acts.push(out);
    }
    return acts;
  }

  predictLogits(X: Float32Array, batch: number): Float32Array {
    const acts = this.forward(X, batch);
    return acts[acts.length - 1];
  }

  private adam(param: Float32Array, grad: Float32Array, state: AdamState,
               lr: number, scale: number, weightDecay: number): void {
    const b1 = 0.9;
    const b2 = 0.999;
    const eps = 1e-8;
    const t = this.step;
    const c1 = 1 - Math.pow(b1, t);
    const c2 = 1 - Math.pow(b2, t);
    const decay = 1 - lr * weightDecay;
    for (let i = 0; i < param.length; i++) {
      const g = grad[i] * scale;
      state.m[i] = b1 * state.m[i] + (1 - b1) * g;
      state.v[i] = b2 * state.v[i] + (1 - b2) * g * g;
      param[i] = param[i] * decay - (lr * (state.m[i] / c1)) / (Math.sqrt(state.v[i] / c2) + eps);
    }
  }

  /** One Adam step on a minibatch with binary cross-entropy loss. */
  trainBatch(X: Float32Array, y: Uint8Array, batch: number, lr: number,
             weightDecay = 0): number {
    const acts = this.forward(X, batch);
    const L = this.sizes.length - 1;
    const logits = acts[L];
    let loss = 0;
    const delta = new Float32Array(batch);
    for (let i = 0; i < batch; i++) {
      const p = 1 / (1 + Math.exp(-logits[i]));
      const t = y[i];
      loss -= t * Math.log(p + 1e-12) + (1 - t) * Math.log(1 - p + 1e-12);
      delta[i] = p - t;
    }
    this.step += 1;
    let dOut: Float32Array = delta;
    for (let l = L - 1; l >= 0; l--) {
      const fanIn = this.sizes[l];
      const fanOut = this.sizes[l + 1];
      const dW = new Float32Array(fanIn * fanOut);
      const dB = new Float32Array(fanOut);
      backWeights(acts[l], batch, fanIn, dOut, fanOut, dW, dB);
      let dPrev: Float32Array | null = null;
      if (l > 0) {
        dPrev = new Float32Array(batch * fanIn);
        backData(dOut, batch, fanOut, this.weights[l], fanIn, dPrev);
        const h = acts[l];
        for (let i = 0; i < dPrev.length; i++) if (h[i] <= 0) dPrev[i] = 0; // ReLU'
      }
      this.adam(this.weights[l], dW, this.adamW[l], lr, 1 / batch, weightDecay);
      this.adam(this.biases[l], dB, this.adamB[l], lr, 1 / batch, 0);
      if (dPrev) dOut = dPrev;
    }
    return loss / batch;
  }
}

export interface TrainResult {
  error: number;
  trainSize: number;
  testSize: number;
  epochs: number;
}

/** 80/20 split (the tail of the file is the held-out test set). */
export function trainMlp(ds: Dataset, cfg: MlpConfig,
                         log?: (msg: string) => void): TrainResult {
  const width = featureWidth(cfg.inputFormat);
  const testSize = Math.floor(ds.count * 0.2);
  const trainSize = ds.count - testSize;
  const mlp = new Mlp(width, cfg.hiddenLayers, cfg.neuronsPerLayer, cfg.seed);
  const order = new Int32Array(trainSize);
  for (let i = 0; i < trainSize; i++) order[i] = i;
  const rng = makeRng(cfg.seed ^ 0x5eed);
  const batchX = new Float32Array(cfg.batchSize * width);
  const batchY = new Uint8Array(cfg.batchSize);
  for (let epoch = 0; epoch < cfg.epochs; epoch++) {
    shuffle(order, rng);
    const lr = cfg.learningRate / (1 + 0.5 * epoch); // anneal toward a finer fit
    let lossSum = 0;
    let batches = 0;
    for (let lo = 0; lo < trainSize; lo += cfg.batchSize) {
      const n = Math.min(cfg.batchSize, trainSize - lo);
      for (let i = 0; i < n; i++) {
        const row = order[lo + i];
        expandFeatures(ds, row, row + 1, cfg.inputFormat,
                       batchX.subarray(i * width, (i + 1) * width));
        batchY[i] = ds.labels[row];
      }
      lossSum += mlp.trainBatch(batchX, batchY, n, lr,
                                cfg.weightDecay ?? MLP_DEFAULTS.weightDecay);
      batches += 1;
    }
    log?.(`epoch ${epoch + 1}/${cfg.epochs} loss=${(lossSum / batches).toFixed(4)}`);
  }
  // held-out error
  let wrong = 0;
  const chunk = 512;
  for (let lo = trainSize; lo < ds.count; lo += chunk) {
    const hi = Math.min(lo + chunk, ds.count);
    const X = expandFeatures(ds, lo, hi, cfg.inputFormat);
    const logits = mlp.predictLogits(X, hi - lo);
    for (let i = 0; i < hi - lo; i++) {
      const pred = logits[i] > 0 ? 1 : 0;
      if (pred !== ds.labels[lo + i]) wrong += 1;
    }
  }
  return { error: wrong / testSize, trainSize, testSize, epochs: cfg.epochs };
}
