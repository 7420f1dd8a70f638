/**
 * Bench presets.  DNN-1..DNN-6 are the reference network shapes for the
 * modeling-attack sweep; challengeDistribution records which exporter mode
 * the preset expects ("prng" = seed-expanded challenges, "ciphertext" =
 * genuine encryptions).  Optimizer defaults (Adam, lr 1e-3, batch 128,
 * 200 epochs) live in MLP_DEFAULTS; bench runs may override epochs and
 * training size for desk-scale turnaround.
 */

import { InputFormat } from "./dataset.js";

export type ChallengeDistribution = "prng" | "ciphertext";

export interface AttackPreset {
  name: string;
  model: "mlp" | "svm-rbf";
  hiddenLayers: number;
  neuronsPerLayer: number;
  challengeDistribution: ChallengeDistribution;
  inputFormat: InputFormat;
}

export const PRESETS: Record<string, AttackPreset> = {
  "DNN-1": { name: "DNN-1", model: "mlp", hiddenLayers: 4, neuronsPerLayer: 100,
             challengeDistribution: "prng", inputFormat: "binary" },
  "DNN-2": { name: "DNN-2", model: "mlp", hiddenLayers: 4, neuronsPerLayer: 100,
             challengeDistribution: "prng", inputFormat: "real" },
  "DNN-3": { name: "DNN-3", model: "mlp", hiddenLayers: 4, neuronsPerLayer: 100,
             challengeDistribution: "ciphertext", inputFormat: "binary" },
  "DNN-4": { name: "DNN-4", model: "mlp", hiddenLayers: 6, neuronsPerLayer: 100,
             challengeDistribution: "prng", inputFormat: "binary" },
  "DNN-5": { name: "DNN-5", model: "mlp", hiddenLayers: 4, neuronsPerLayer: 200,
             challengeDistribution: "prng", inputFormat: "binary" },
  "DNN-6": { name: "DNN-6", model: "mlp", hiddenLayers: 12, neuronsPerLayer: 2000,
             challengeDistribution: "prng", inputFormat: "binary" },
  "SVM-RBF": { name: "SVM-RBF", model: "svm-rbf", hiddenLayers: 0, neuronsPerLayer: 0,
               challengeDistribution: "prng", inputFormat: "binary" },
};
