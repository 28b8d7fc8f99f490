/**
 * Deterministic random numbers derived from a request seed.
 *
 * splitmix64 drives everything; the adapter owns no global randomness, so
 * the same (seed, draw index) always yields the same value regardless of
 * session history.
 */

const MASK64 = (1n << 64n) - 1n;
const GOLDEN = 0x9e3779b97f4a7c15n;

/** One splitmix64 step: returns the next state and a mixed 64-bit output. */
function mix(state: bigint): { state: bigint; out: bigint } {
  const next = (state + GOLDEN) & MASK64;
  let z = next;
  z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK64;
  z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK64;
  z = z ^ (z >> 31n);
  return { state: next, out: z };
}

export class SeededRng {
  private state: bigint;

  constructor(seed: number | bigint) {
    if (typeof seed === "number") {
      if (!Number.isFinite(seed) || !Number.isInteger(seed)) {
        throw new Error(`seed must be an integer, got ${seed}`);
      }
      seed = BigInt(seed);
    }
    this.state = seed & MASK64;
  }

  nextU64(): bigint {
    const { state, out } = mix(this.state);
    this.state = state;
    return out;
  }

  /** Uniform in [0, 1) with 53 bits of precision. */
  nextFloat(): number {
    return Number(this.nextU64() >> 11n) / 2 ** 53;
  }

  /** Standard normal via Box-Muller; two uniforms per draw, no cached spare. */
  nextGaussian(): number {
    const u1 = 1.0 - this.nextFloat(); // (0, 1], keeps the log finite
    const u2 = this.nextFloat();
    return Math.sqrt(-2.0 * Math.log(u1)) * Math.cos(2.0 * Math.PI * u2);
  }
}
