/**
 * Export jobs: embed whole images plus their seeded crops, and label
 * prompts plus descriptions, into WEM1 stores the engine consumes.
 *
 * Id scheme (must match the engine exactly):
 *   "<id>"                whole image        "<label>::<j>"   description j
 *   "<id>::<i>"           crop i             "cls::<label>"   label prompt
 *   "cls::<label>::t<k>"  ensemble template k (optional)
 *
 * Crops are regenerated from the same portable stream the engine uses, so
 * both sides agree on every crop without exchanging anything but the seed.
 */

import { readFileSync, writeFileSync } from 'fs'
import * as path from 'path'

import { cropSpecsForImage, CropConfig } from './crops'
import { Encoder } from './encoder'
import { cropImage, loadImage } from './image'
import { addEntry, createStore, encodeStore, WemStore } from './wem'

export interface ExportJob {
  model: string
  manifestPath: string
  descriptionsPath: string
  /** directory image ids resolve against; defaults to the manifest's directory */
  root?: string
  alpha: number
  beta: number
  numCrops: number
  seed: number
  template: string
  /** extra templates exported as cls::<label>::t<k> for ensemble scoring */
  ensembleTemplates?: string[]
  imagesOut: string
  textsOut: string
}

export interface ManifestRecord {
  id: string
  label: string
}

export const DEFAULT_TEMPLATE = 'a photo of a {}'

export function readManifest(manifestPath: string): ManifestRecord[] {
  const records: ManifestRecord[] = []
  const seen = new Set<string>()
  const lines = readFileSync(manifestPath, 'utf-8').split('\n')
  lines.forEach((line, index) => {
    if (!line.trim()) return
    let obj: any
    try {
      obj = JSON.parse(line)
    } catch (err) {
      throw new Error(`${manifestPath}:${index + 1}: malformed JSON: ${err}`)
    }
    if (typeof obj?.id !== 'string' || typeof obj?.label !== 'string') {
      throw new Error(`${manifestPath}:${index + 1}: expected {"id": ..., "label": ...}`)
    }
    if (seen.has(obj.id)) throw new Error(`${manifestPath}: duplicate image id ${JSON.stringify(obj.id)}`)
    seen.add(obj.id)
    records.push({ id: obj.id, label: obj.label })
  })
  if (records.length === 0) throw new Error(`${manifestPath}: manifest holds no records`)
  return records
}

/** Depth-1 object keys in raw order; JSON.parse would silently collapse
 * duplicates, and duplicate class names must be an error. */
export function topLevelKeys(jsonText: string): string[] {
  const keys: string[] = []
  let depth = 0
  let inString = false
  let escaped = false
  let current = ''
  let capturing = false
  for (let i = 0; i < jsonText.length; i++) {
    const ch = jsonText[i]
    if (inString) {
      if (escaped) {
        escaped = false
        if (capturing) current += ch
      } else if (ch === '\\') {
        escaped = true
        if (capturing) current += ch
      } else if (ch === '"') {
        inString = false
        if (capturing) {
          // only a key if the next non-space char is a colon
          let j = i + 1
          while (j < jsonText.length && /\s/.test(jsonText[j])) j++
          if (jsonText[j] === ':') keys.push(JSON.parse(`"${current}"`))
          capturing = false
        }
      } else if (capturing) {
        current += ch
      }
      continue
    }
    if (ch === '"') {
      inString = true
      if (depth === 1) {
        capturing = true
        current = ''
      }
      continue
    }
    if (ch === '{' || ch === '[') depth++
    else if (ch === '}' || ch === ']') depth--
  }
  return keys
}

export function readDescriptions(descriptionsPath: string): Map<string, string[]> {
  const text = readFileSync(descriptionsPath, 'utf-8')
  let raw: any
  try {
    raw = JSON.parse(text)
  } catch (err) {
    throw new Error(`${descriptionsPath}: malformed JSON: ${err}`)
  }
  if (raw === null || typeof raw !== 'object' || Array.isArray(raw)) {
    throw new Error(`${descriptionsPath}: expected an object of class -> [descriptions]`)
  }
  const keys = topLevelKeys(text)
  const dupes = keys.filter((k, i) => keys.indexOf(k) < i)
  if (dupes.length > 0) {
    throw new Error(`${descriptionsPath}: duplicate class name ${JSON.stringify(dupes[0])}`)
  }
  const out = new Map<string, string[]>()
  for (const [label, descs] of Object.entries(raw)) {
    if (!Array.isArray(descs) || descs.length === 0 || descs.some((d) => typeof d !== 'string' || !d)) {
      throw new Error(`${descriptionsPath}: class ${JSON.stringify(label)} must map to nonempty strings`)
    }
    out.set(label, descs as string[])
  }
  if (out.size === 0) throw new Error(`${descriptionsPath}: no classes`)
  return out
}

function sidecar(job: ExportJob): string {
  return JSON.stringify(
    {
      model: job.model,
      seed: job.seed,
      alpha: job.alpha,
      beta: job.beta,
      N: job.numCrops,
      created: new Date().toISOString(),
    },
    null,
    2,
  )
}

function writeStore(store: WemStore, outPath: string, job: ExportJob): void {
  writeFileSync(outPath, encodeStore(store))
  writeFileSync(outPath + '.meta.json', sidecar(job) + '\n')
}

export async function exportImages(job: ExportJob, encoder: Encoder): Promise<WemStore> {
  const records = readManifest(job.manifestPath)
  const root = job.root ?? path.dirname(job.manifestPath)
  const cropCfg: CropConfig = {
    alpha: job.alpha,
    beta: job.beta,
    numCrops: job.numCrops,
    seed: job.seed,
  }
  const store = createStore(encoder.dim, true)
  for (const record of records) {
    let img
    try {
      img = loadImage(path.join(root, record.id))
    } catch (err) {
      throw new Error(`image ${JSON.stringify(record.id)}: ${err}`)
    }
    addEntry(store, record.id, await encoder.encodeImage(img))
    const specs = cropSpecsForImage(cropCfg, img.width, img.height, record.id)
    for (let i = 0; i < specs.length; i++) {
      const patch = cropImage(img, specs[i].left, specs[i].top, specs[i].size)
      addEntry(store, `${record.id}::${i}`, await encoder.encodeImage(patch))
    }
  }
  writeStore(store, job.imagesOut, job)
  return store
}

export async function exportTexts(job: ExportJob, encoder: Encoder): Promise<WemStore> {
  const descriptions = readDescriptions(job.descriptionsPath)
  const store = createStore(encoder.dim, true)
  for (const [label, descs] of descriptions) {
    const prompt = job.template.replace('{}', label)
    addEntry(store, `cls::${label}`, await encoder.encodeText(prompt))
    for (let j = 0; j < descs.length; j++) {
      addEntry(store, `${label}::${j}`, await encoder.encodeText(descs[j]))
    }
    const ensemble = job.ensembleTemplates ?? []
    for (let k = 0; k < ensemble.length; k++) {
      addEntry(store, `cls::${label}::t${k}`, await encoder.encodeText(ensemble[k].replace('{}', label)))
    }
  }
  writeStore(store, job.textsOut, job)
  return store
}

export async function runExport(job: ExportJob, encoder: Encoder) {
  if (job.template.split('{}').length !== 2) {
    throw new Error(`template must contain exactly one {} placeholder: ${JSON.stringify(job.template)}`)
  }
  const images = await exportImages(job, encoder)
  const texts = await exportTexts(job, encoder)
  return {
    images: images.entries.size,
    texts: texts.entries.size,
    dim: encoder.dim,
    model: encoder.name,
  }
}
