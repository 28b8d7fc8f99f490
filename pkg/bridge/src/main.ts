#!/usr/bin/env node
/**
 * Entry point: pick a model from the command line and serve the protocol.
 *
 *   node dist/src/main.js --model toy-ar --phi 0.5 --noise 0.1 \
 *       --dims 3 --context 16 [--delay-ms 0]
 */

import { toyArModel } from "./models.js";
import { serve } from "./serve.js";

interface CliOptions {
  model: string;
  phi: number;
  noise: number;
  dims: number;
  context: number;
  delayMs: number;
}

const DEFAULTS: CliOptions = {
  model: "toy-ar",
  phi: 0.5,
  noise: 0.1,
  dims: 1,
  context: 1,
  delayMs: 0,
};

function parseArgs(argv: string[]): CliOptions {
  const opts = { ...DEFAULTS };
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (flag === undefined) break;
    if (value === undefined) {
      throw new Error(`flag ${flag} needs a value`);
    }
    switch (flag) {
      case "--model":
        opts.model = value;
        break;
      case "--phi":
        opts.phi = Number(value);
        break;
      case "--noise":
        opts.noise = Number(value);
        break;
      case "--dims":
        opts.dims = Number(value);
        break;
      case "--context":
        opts.context = Number(value);
        break;
      case "--delay-ms":
        opts.delayMs = Number(value);
        break;
      default:
        throw new Error(`unknown flag ${flag}`);
    }
  }
  return opts;
}

async function main(): Promise<void> {
  const opts = parseArgs(process.argv.slice(2));
  if (opts.model !== "toy-ar") {
    throw new Error(`unknown model ${opts.model}; available: toy-ar`);
  }
  const model = toyArModel({
    phi: opts.phi,
    noiseStd: opts.noise,
    dims: opts.dims,
    contextLen: opts.context,
  });
  await serve(model, { delayMs: opts.delayMs });
}

main().catch((err) => {
  console.error(`[generator-bridge] fatal: ${err}`);
  process.exit(1);
});
