/**
 * Portable seeded streams, bit-identical to the engine's sampler.
 *
 * SplitMix64 over a 64-bit state (BigInt, masked to 64 bits) plus FNV-1a 64
 * for hashing image ids into per-image stream seeds. Floats take the top 53
 * bits over 2^53; bounded ints use a plain modulo. Every draw consumes
 * exactly one next() call, so whole crop-spec sequences reproduce across
 * implementations.
 */

const MASK = (1n << 64n) - 1n
const GAMMA = 0x9e3779b97f4a7c15n
const FNV_OFFSET = 0xcbf29ce484222325n
const FNV_PRIME = 0x100000001b3n
const TWO_POW_53 = 9007199254740992 // 2 ** 53, exact in a double

export function fnv1a64(data: Uint8Array): bigint {
  let h = FNV_OFFSET
  for (const byte of data) {
    h ^= BigInt(byte)
    h = (h * FNV_PRIME) & MASK
  }
  return h
}

export class SplitMix64 {
  private state: bigint

  constructor(state: bigint) {
    this.state = state & MASK
  }

  nextU64(): bigint {
    this.state = (this.state + GAMMA) & MASK
    let z = this.state
    z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK
    z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK
    return z ^ (z >> 31n)
  }

  /** Uniform double in [0, 1) with 53 bits of precision. */
  u01(): number {
    return Number(this.nextU64() >> 11n) / TWO_POW_53
  }

  /** Uniform double in [lo, hi); returns lo when lo === hi. */
  uniform(lo: number, hi: number): number {
    return lo + (hi - lo) * this.u01()
  }

  /** Uniform integer in {0, ..., n-1}. */
  below(n: number): number {
    if (n <= 0) throw new Error('below() requires a positive bound')
    return Number(this.nextU64() % BigInt(n))
  }
}

/** First SplitMix64 output for the given state; spreads low-entropy seeds. */
export function mix64(seed: bigint): bigint {
  return new SplitMix64(seed).nextU64()
}

/** Per-image stream state derived from the global seed and the image id. */
export function streamSeed(globalSeed: bigint | number, imageId: string): bigint {
  const seed = BigInt(globalSeed) & MASK
  return fnv1a64(new TextEncoder().encode(imageId)) ^ mix64(seed)
}

export function streamForImage(globalSeed: bigint | number, imageId: string): SplitMix64 {
  return new SplitMix64(streamSeed(globalSeed, imageId))
}
