/**
 * Bench CLI.
 *
 *   node dist/cli.js --dataset lattice.csv --preset DNN-1 --epochs 5 \
 *        --train-size 200000 --out results.csv
 *
 * --preset all runs DNN-1..DNN-6 in sequence.
 */

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { appendCsv, runAttack } from "./bench.js";
import { PRESETS } from "./presets.js";

const argv = yargs(hideBin(process.argv))
  .option("dataset", { type: "string", demandOption: true })
  .option("preset", { type: "string", default: "DNN-1" })
  .option("train-size", { type: "number", default: 200_000 })
  .option("epochs", { type: "number", default: 5 })
  .option("seed", { type: "number", default: 1 })
  .option("out", { type: "string" })
  .option("verbose", { type: "boolean", default: false })
  .strict()
  .parseSync();

const names = argv.preset === "all"
  ? Object.keys(PRESETS).filter((n) => n.startsWith("DNN"))
  : [argv.preset];

for (const name of names) {
  const started = Date.now();
  const result = runAttack(argv.dataset, name, {
    trainSize: argv["train-size"],
    epochs: argv.epochs,
    seed: argv.seed,
    log: argv.verbose ? (m) => console.error(`[${name}] ${m}`) : undefined,
  });
  const secs = ((Date.now() - started) / 1000).toFixed(1);
  console.log(`${result.preset}: train=${result.trainSize} test=${result.testSize} ` +
    `error=${result.error.toFixed(4)} (${secs}s)`);
  if (argv.out) appendCsv(argv.out, result);
}
