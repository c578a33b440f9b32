/**
 * Seeded square crop sampling, matching the engine spec for spec: per crop,
 * three draws in order (scale gamma, left offset, top offset) from the
 * per-image stream; size is round-half-up of gamma times the short side,
 * clamped to the valid range.
 */

import { SplitMix64, streamForImage } from './rng'

export interface CropSpec {
  gamma: number
  size: number
  left: number
  top: number
}

export interface CropConfig {
  alpha: number
  beta: number
  numCrops: number
  seed: number
}

export function validateConfig(cfg: CropConfig): void {
  if (!(cfg.alpha > 0 && cfg.alpha <= cfg.beta && cfg.beta <= 1)) {
    throw new Error(`need 0 < alpha <= beta <= 1, got alpha=${cfg.alpha}, beta=${cfg.beta}`)
  }
  if (cfg.numCrops < 1) throw new Error(`numCrops must be >= 1, got ${cfg.numCrops}`)
}

export function cropSize(gamma: number, shortSide: number): number {
  const n = Math.floor(gamma * shortSide + 0.5)
  return Math.max(1, Math.min(shortSide, n))
}

export function sampleCropSpecs(
  cfg: CropConfig,
  width: number,
  height: number,
  stream: SplitMix64,
): CropSpec[] {
  validateConfig(cfg)
  if (width < 1 || height < 1) {
    throw new Error(`image dims must be positive, got ${width}x${height}`)
  }
  const short = Math.min(width, height)
  const specs: CropSpec[] = []
  for (let i = 0; i < cfg.numCrops; i++) {
    const gamma = stream.uniform(cfg.alpha, cfg.beta)
    const size = cropSize(gamma, short)
    const left = stream.below(width - size + 1)
    const top = stream.below(height - size + 1)
    specs.push({ gamma, size, left, top })
  }
  return specs
}

export function cropSpecsForImage(
  cfg: CropConfig,
  width: number,
  height: number,
  imageId: string,
): CropSpec[] {
  return sampleCropSpecs(cfg, width, height, streamForImage(cfg.seed, imageId))
}
