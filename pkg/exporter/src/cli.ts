#!/usr/bin/env node
/**
 * wem-export: embed a manifest of images (whole + seeded crops) and a
 * description file (label prompts + descriptions) with a vision-language
 * encoder, writing WEM1 stores plus metadata sidecars for the engine.
 *
 * Exit codes: 0 success, 1 usage/domain errors, 2 I/O errors.
 */

import { parseArgs } from 'util'

import { loadEncoder } from './encoder'
import { DEFAULT_TEMPLATE, ExportJob, runExport } from './export'

const USAGE = `usage: wem-export --manifest m.jsonl --descriptions d.json \\
           --images-out images.wem1 --texts-out texts.wem1 \\
           [--root DIR] [--model mock|mock:<grid>|clip|clip:<model>] \\
           [--alpha 0.5] [--beta 0.9] [--crops 60] [--seed 0] \\
           [--template "a photo of a {}"] [--ensemble-template T ...]`

function numberFlag(value: string | undefined, fallback: number, name: string): number {
  if (value === undefined) return fallback
  const parsed = Number(value)
  if (!Number.isFinite(parsed)) throw new Error(`--${name} must be a number, got ${value}`)
  return parsed
}

export async function main(argv: string[]): Promise<number> {
  let values
  try {
    values = parseArgs({
      args: argv,
      options: {
        manifest: { type: 'string' },
        descriptions: { type: 'string' },
        root: { type: 'string' },
        'images-out': { type: 'string' },
        'texts-out': { type: 'string' },
        model: { type: 'string', default: 'clip' },
        alpha: { type: 'string' },
        beta: { type: 'string' },
        crops: { type: 'string' },
        seed: { type: 'string' },
        template: { type: 'string', default: DEFAULT_TEMPLATE },
        'ensemble-template': { type: 'string', multiple: true },
        help: { type: 'boolean', default: false },
      },
    }).values
  } catch (err: any) {
    console.error(String(err?.message ?? err))
    console.error(USAGE)
    return 1
  }
  if (values.help) {
    console.log(USAGE)
    return 0
  }
  for (const required of ['manifest', 'descriptions', 'images-out', 'texts-out'] as const) {
    if (!values[required]) {
      console.error(`missing required flag --${required}`)
      console.error(USAGE)
      return 1
    }
  }

  const seedEnv = process.env.WCA_SEED
  const job: ExportJob = {
    model: values.model!,
    manifestPath: values.manifest!,
    descriptionsPath: values.descriptions!,
    root: values.root,
    alpha: numberFlag(values.alpha, 0.5, 'alpha'),
    beta: numberFlag(values.beta, 0.9, 'beta'),
    numCrops: numberFlag(values.crops, 60, 'crops'),
    seed: numberFlag(values.seed, seedEnv ? Number(seedEnv) : 0, 'seed'),
    template: values.template!,
    ensembleTemplates: values['ensemble-template'],
    imagesOut: values['images-out']!,
    textsOut: values['texts-out']!,
  }

  try {
    const encoder = await loadEncoder(job.model)
    const summary = await runExport(job, encoder)
    console.error(
      `exported ${summary.images} image and ${summary.texts} text embeddings ` +
        `(dim ${summary.dim}, model ${summary.model})`,
    )
    console.log(JSON.stringify(summary))
    return 0
  } catch (err: any) {
    const message = String(err?.message ?? err)
    console.error(message)
    return err?.code === 'ENOENT' || /EACCES|ENOSPC|not a PNG/.test(message) ? 2 : 1
  }
}

if (require.main === module) {
  main(process.argv.slice(2)).then((code) => process.exit(code))
}
