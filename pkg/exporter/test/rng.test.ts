// Frozen vectors computed with an independent big-integer reference of the
// published SplitMix64 and FNV-1a definitions; identical constants pin the
// engine's sampler on the Python side.

import { describe, expect, it } from 'vitest'

import { SplitMix64, fnv1a64, mix64, streamForImage, streamSeed } from '../src/rng'

describe('SplitMix64', () => {
  it('matches the published seed-0 stream', () => {
    const rng = new SplitMix64(0n)
    expect([rng.nextU64(), rng.nextU64(), rng.nextU64(), rng.nextU64(), rng.nextU64()]).toEqual([
      0xe220a8397b1dcdafn,
      0x6e789e6aa1b965f4n,
      0x06c45d188009454fn,
      0xf88bb8a8724c81ecn,
      0x1b39896a51a8749bn,
    ])
  })

  it('matches the seed-42 stream', () => {
    const rng = new SplitMix64(42n)
    expect([rng.nextU64(), rng.nextU64(), rng.nextU64()]).toEqual([
      0xbdd732262feb6e95n,
      0x28efe333b266f103n,
      0x47526757130f9f52n,
    ])
  })

  it('u01 stays in [0, 1) and below() validates', () => {
    const rng = new SplitMix64(9n)
    for (let i = 0; i < 1000; i++) {
      const x = rng.u01()
      expect(x).toBeGreaterThanOrEqual(0)
      expect(x).toBeLessThan(1)
    }
    expect(() => rng.below(0)).toThrow()
  })

  it('uniform handles a degenerate interval', () => {
    expect(new SplitMix64(5n).uniform(1, 1)).toBe(1)
  })
})

describe('fnv1a64', () => {
  it('matches reference vectors', () => {
    expect(fnv1a64(new Uint8Array())).toBe(0xcbf29ce484222325n)
    expect(fnv1a64(new TextEncoder().encode('a'))).toBe(0xaf63dc4c8601ec8cn)
    expect(fnv1a64(new TextEncoder().encode('img_001'))).toBe(0x0a7f10720a6ac7a8n)
  })
})

describe('stream derivation', () => {
  it('mixes seeds through splitmix', () => {
    expect(mix64(0n)).toBe(0xe220a8397b1dcdafn)
    expect(mix64(7n)).toBe(0x63cbe1e459320dd7n)
    expect(mix64(-1n)).toBe(0xe4d971771b652c20n)
  })

  it('derives the per-image stream seed', () => {
    expect(streamSeed(7, 'img_001')).toBe(0x69b4f1965358ca7fn)
  })

  it('reproduces the engine draws for (seed 7, img_001)', () => {
    const stream = streamForImage(7, 'img_001')
    expect(stream.uniform(0.5, 0.9)).toBe(0.8524865172108498)
    expect(stream.below(113)).toBe(51)
    expect(stream.below(113)).toBe(93)
  })

  it('separates streams across ids and seeds', () => {
    const a = streamForImage(7, 'x').nextU64()
    const b = streamForImage(7, 'y').nextU64()
    const c = streamForImage(8, 'x').nextU64()
    expect(new Set([a, b, c]).size).toBe(3)
  })
})
