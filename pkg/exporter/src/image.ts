/**
 * PNG/JPEG decoding into flat RGB buffers, alpha composited over white,
 * plus crop extraction. No resampling happens here; any resizing belongs
 * to the encoder's own preprocessing.
 */

import { readFileSync } from 'fs'
import { PNG } from 'pngjs'
import * as jpeg from 'jpeg-js'

export interface RgbImage {
  width: number
  height: number
  /** height * width * 3 bytes, row-major RGB */
  pixels: Uint8Array
}

function fromRgba(width: number, height: number, rgba: Uint8Array): RgbImage {
  const pixels = new Uint8Array(width * height * 3)
  for (let i = 0, j = 0; i < rgba.length; i += 4, j += 3) {
    const a = rgba[i + 3] / 255
    pixels[j] = Math.round(rgba[i] * a + 255 * (1 - a))
    pixels[j + 1] = Math.round(rgba[i + 1] * a + 255 * (1 - a))
    pixels[j + 2] = Math.round(rgba[i + 2] * a + 255 * (1 - a))
  }
  return { width, height, pixels }
}

export function loadImage(path: string): RgbImage {
  const data = readFileSync(path)
  if (data.length >= 8 && data[0] === 0x89 && data[1] === 0x50) {
    const png = PNG.sync.read(data)
    return fromRgba(png.width, png.height, new Uint8Array(png.data))
  }
  if (data.length >= 2 && data[0] === 0xff && data[1] === 0xd8) {
    const img = jpeg.decode(data, { useTArray: true, formatAsRGBA: true })
    return fromRgba(img.width, img.height, new Uint8Array(img.data))
  }
  throw new Error(`${path}: not a PNG or JPEG file`)
}

export function cropImage(img: RgbImage, left: number, top: number, size: number): RgbImage {
  if (left < 0 || top < 0 || left + size > img.width || top + size > img.height) {
    throw new Error(`crop ${size}px at (${left}, ${top}) exceeds ${img.width}x${img.height} image`)
  }
  const pixels = new Uint8Array(size * size * 3)
  for (let r = 0; r < size; r++) {
    const srcStart = ((top + r) * img.width + left) * 3
    pixels.set(img.pixels.subarray(srcStart, srcStart + size * 3), r * size * 3)
  }
  return { width: size, height: size, pixels }
}
