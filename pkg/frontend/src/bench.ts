/** Attack runner: dataset + preset -> held-out prediction error. */

import { appendFileSync, existsSync, writeFileSync } from "node:fs";
import { basename } from "node:path";

import { Dataset, loadDataset } from "./dataset.js";
import { MLP_DEFAULTS, MlpConfig, trainMlp } from "./mlp.js";
import { AttackPreset, PRESETS } from "./presets.js";
import { SVM_DEFAULTS, trainSvm } from "./svm.js";

export interface BenchOptions {
  trainSize?: number; // rows drawn from the file (train + 20% test on top)
  epochs?: number;
  batchSize?: number;
  learningRate?: number;
  weightDecay?: number;
  seed?: number;
  log?: (msg: string) => void;
}

export interface BenchResult {
  preset: string;
  dataset: string;
  trainSize: number;
  testSize: number;
  error: number;
}

export function runAttack(datasetPath: string, preset: AttackPreset | string,
                          opts: BenchOptions = {}): BenchResult {
  const p = typeof preset === "string" ? PRESETS[preset] : preset;
  if (!p) {
    throw new Error(`unknown preset ${preset}; known: ${Object.keys(PRESETS).join(", ")}`);
  }
  // limit = train rows + matching 20% test split
  const limit = opts.trainSize ? Math.ceil(opts.trainSize / 0.8) : undefined;
  const ds: Dataset = loadDataset(datasetPath, limit);
  const dataset = basename(datasetPath);
  if (p.model === "svm-rbf") {
    const r = trainSvm(ds, { ...SVM_DEFAULTS, inputFormat: p.inputFormat,
                             seed: opts.seed ?? SVM_DEFAULTS.seed });
    return { preset: p.name, dataset, trainSize: r.trainSize, testSize: r.testSize,
             error: r.error };
  }
  const cfg: MlpConfig = {
    hiddenLayers: p.hiddenLayers,
    neuronsPerLayer: p.neuronsPerLayer,
    inputFormat: p.inputFormat,
    epochs: opts.epochs ?? MLP_DEFAULTS.epochs,
    batchSize: opts.batchSize ?? MLP_DEFAULTS.batchSize,
    learningRate: opts.learningRate ?? MLP_DEFAULTS.learningRate,
    weightDecay: opts.weightDecay ?? MLP_DEFAULTS.weightDecay,
    seed: opts.seed ?? MLP_DEFAULTS.seed,
  };
  const r = trainMlp(ds, cfg, opts.log);
  return { preset: p.name, dataset, trainSize: r.trainSize, testSize: r.testSize,
           error: r.error };
}

export function appendCsv(path: string, result: BenchResult): void {
  if (!existsSync(path)) {
    writeFileSync(path, "preset,dataset,train_size,test_size,error\n");
  }
  appendFileSync(path, `${result.preset},${result.dataset},${result.trainSize},` +
    `${result.testSize},${result.error.toFixed(6)}\n`);
}
