/**
 * Embedding backends. The mock encoder is fully deterministic and needs no
 * model runtime: images become a centered block-mean grid, texts a hashed
 * character-trigram projection, both unit-normalized. A real CLIP backend
 * loads lazily through transformers.js when that package and its weights
 * are available; everything downstream only sees the Encoder interface.
 */

import { RgbImage } from './image'
import { SplitMix64, fnv1a64 } from './rng'

export interface Encoder {
  name: string
  dim: number
  encodeImage(img: RgbImage): Promise<Float32Array>
  encodeText(text: string): Promise<Float32Array>
}

export function normalize(vec: Float64Array): Float32Array {
  let sum = 0
  for (const x of vec) sum += x * x
  let norm = Math.sqrt(sum)
  if (norm === 0) {
    vec[0] = 1
    norm = 1
  }
  const out = new Float32Array(vec.length)
  for (let i = 0; i < vec.length; i++) out[i] = vec[i] / norm
  return out
}

export class MockEncoder implements Encoder {
  readonly name: string
  readonly dim: number
  private readonly grid: number

  constructor(grid = 4) {
    if (grid < 1) throw new Error('grid must be >= 1')
    this.grid = grid
    this.dim = 3 * grid * grid
    this.name = `mock:${grid}`
  }

  async encodeImage(img: RgbImage): Promise<Float32Array> {
    const g = this.grid
    const acc = new Float64Array(this.dim)
    const counts = new Float64Array(g * g)
    for (let r = 0; r < img.height; r++) {
      const cellR = Math.min(g - 1, Math.floor((r * g) / img.height))
      for (let c = 0; c < img.width; c++) {
        const cellC = Math.min(g - 1, Math.floor((c * g) / img.width))
        const cell = cellR * g + cellC
        const px = (r * img.width + c) * 3
        acc[cell * 3] += img.pixels[px] / 255
        acc[cell * 3 + 1] += img.pixels[px + 1] / 255
        acc[cell * 3 + 2] += img.pixels[px + 2] / 255
        counts[cell]++
      }
    }
    for (let cell = 0; cell < g * g; cell++) {
      const n = counts[cell] || 1
      for (let k = 0; k < 3; k++) acc[cell * 3 + k] = acc[cell * 3 + k] / n - 0.5
    }
    return normalize(acc)
  }

  async encodeText(text: string): Promise<Float32Array> {
    const padded = `  ${text.toLowerCase()} `
    const acc = new Float64Array(this.dim)
    for (let i = 0; i + 3 <= padded.length; i++) {
      const tri = padded.slice(i, i + 3)
      const stream = new SplitMix64(fnv1a64(new TextEncoder().encode(tri)))
      for (let k = 0; k < this.dim; k++) acc[k] += stream.u01() - 0.5
    }
    return normalize(acc)
  }
}

const CLIP_MODEL = 'Xenova/clip-vit-base-patch32'

/** Real vision-language backend; throws a descriptive error when the
 * transformers.js runtime or its weights are unavailable. */
export async function loadClipEncoder(model = CLIP_MODEL): Promise<Encoder> {
  let tjs: any
  try {
    tjs = await import('@xenova/transformers' as string)
  } catch (err) {
    throw new Error(
      `CLIP backend needs the optional dependency @xenova/transformers ` +
        `(npm install @xenova/transformers): ${err}`,
    )
  }
  const tokenizer = await tjs.AutoTokenizer.from_pretrained(model)
  const processor = await tjs.AutoProcessor.from_pretrained(model)
  const textModel = await tjs.CLIPTextModelWithProjection.from_pretrained(model)
  const visionModel = await tjs.CLIPVisionModelWithProjection.from_pretrained(model)

  return {
    name: model,
    dim: textModel.config.projection_dim,
    async encodeImage(img: RgbImage): Promise<Float32Array> {
      const rgba = new Uint8ClampedArray(img.width * img.height * 4)
      for (let i = 0, j = 0; j < img.pixels.length; i += 4, j += 3) {
        rgba[i] = img.pixels[j]
        rgba[i + 1] = img.pixels[j + 1]
        rgba[i + 2] = img.pixels[j + 2]
        rgba[i + 3] = 255
      }
      const raw = new tjs.RawImage(rgba, img.width, img.height, 4)
      const inputs = await processor(raw)
      const { image_embeds } = await visionModel(inputs)
      return normalize(Float64Array.from(image_embeds.data as Float32Array))
    },
    async encodeText(text: string): Promise<Float32Array> {
      const inputs = tokenizer([text], { padding: true, truncation: true })
      const { text_embeds } = await textModel(inputs)
      return normalize(Float64Array.from(text_embeds.data as Float32Array))
    },
  }
}

export async function loadEncoder(spec: string): Promise<Encoder> {
  if (spec === 'mock') return new MockEncoder()
  if (spec.startsWith('mock:')) {
    const grid = Number(spec.slice(5))
    if (!Number.isInteger(grid)) throw new Error(`bad encoder spec ${JSON.stringify(spec)}`)
    return new MockEncoder(grid)
  }
  if (spec === 'clip') return loadClipEncoder()
  if (spec.startsWith('clip:')) return loadClipEncoder(spec.slice(5))
  throw new Error(
    `unknown encoder spec ${JSON.stringify(spec)}; expected mock, mock:<grid>, clip, or clip:<model>`,
  )
}
