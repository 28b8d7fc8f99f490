/**
 * Adapter-side proposal models: given the conditioning context and the
 * request seed, produce the next value. Deterministic per (context, seed).
 */

import { SeededRng } from "./rng.js";

export interface AdapterModel {
  readonly dims: number;
  readonly contextLen: number;
  /** Next value given a (rows x dims) context; all randomness from `seed`. */
  next(context: number[][], seed: number): number[];
}

export interface ToyArOptions {
  phi: number;
  noiseStd: number;
  dims: number;
  contextLen: number;
}

/**
 * First-order autoregressive toy: phi * (last context row) plus Gaussian
 * noise drawn from the request seed. Needs no ML runtime; exists so hosts
 * can exercise the full wire protocol end to end.
 */
export function toyArModel(opts: ToyArOptions): AdapterModel {
  const { phi, noiseStd, dims, contextLen } = opts;
  if (!Number.isFinite(phi)) throw new Error("phi must be finite");
  if (!Number.isFinite(noiseStd) || noiseStd < 0) {
    throw new Error("noise std must be a nonnegative real");
  }
  if (!Number.isInteger(dims) || dims < 1) throw new Error("dims must be >= 1");
  if (!Number.isInteger(contextLen) || contextLen < 1) {
    throw new Error("context length must be >= 1");
  }
  return {
    dims,
    contextLen,
    next(context: number[][], seed: number): number[] {
      const last = context[context.length - 1];
      if (last === undefined || last.length !== dims) {
        throw new Error(
          `context rows must have width ${dims}, got ${last?.length ?? 0}`,
        );
      }
      const rng = new SeededRng(seed);
      const value = last.map((v) => phi * v + noiseStd * rng.nextGaussian());
      if (!value.every(Number.isFinite)) {
        throw new Error("model produced a non-finite value");
      }
      return value;
    },
  };
}
