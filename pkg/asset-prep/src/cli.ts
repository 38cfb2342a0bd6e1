#!/usr/bin/env node
/**
 * asset-prep foreground --out DIR [--model kind=name ...] image.png ...
 * asset-prep background --out DIR [--captions] [--model kind=name ...] image.png ...
 * asset-prep models
 */

import { realpathSync } from 'node:fs';
import { pathToFileURL } from 'node:url';
import { parseArgs } from 'node:util';
import { AssetPrepError } from './errors.js';
import type { ModelKind } from './models.js';
import { DEFAULT_MODELS, createModelSuite, modelNames } from './models.js';
import { prepareBackgrounds, prepareForegrounds } from './prepare.js';

const USAGE = `usage:
  asset-prep foreground --out DIR [--model kind=name ...] IMAGE...
  asset-prep background --out DIR [--captions] [--model kind=name ...] IMAGE...
  asset-prep models

Model kinds: ${Object.keys(DEFAULT_MODELS).join(', ')}.`;

function parseOverrides(specs: string[]): Partial<Record<ModelKind, string>> {
  const overrides: Partial<Record<ModelKind, string>> = {};
  for (const spec of specs) {
    const eq = spec.indexOf('=');
    if (eq <= 0) {
      throw new AssetPrepError(`--model expects kind=name, got '${spec}'`);
    }
    const kind = spec.slice(0, eq);
    if (!(kind in DEFAULT_MODELS)) {
      throw new AssetPrepError(
        `unknown model kind '${kind}' (expected one of ${Object.keys(DEFAULT_MODELS).join(', ')})`,
      );
    }
    overrides[kind as ModelKind] = spec.slice(eq + 1);
  }
  return overrides;
}

export function main(argv: string[]): number {
  const command = argv[0];
  if (!command || command === '--help' || command === '-h') {
    console.log(USAGE);
    return command ? 0 : 2;
  }

  if (command === 'models') {
    for (const kind of Object.keys(DEFAULT_MODELS) as ModelKind[]) {
      console.log(`${kind}: ${modelNames(kind).join(', ')} (default ${DEFAULT_MODELS[kind]})`);
    }
    return 0;
  }

  if (command !== 'foreground' && command !== 'background') {
    console.error(`error: unknown command '${command}'\n${USAGE}`);
    return 2;
  }

  try {
    const { values, positionals } = parseArgs({
      args: argv.slice(1),
      options: {
        out: { type: 'string' },
        captions: { type: 'boolean', default: false },
        model: { type: 'string', multiple: true, default: [] },
      },
      allowPositionals: true,
    });
    if (!values.out) {
      throw new AssetPrepError('--out is required');
    }
    if (positionals.length === 0) {
      throw new AssetPrepError('no input images given');
    }
    const suite = createModelSuite(parseOverrides(values.model ?? []));

    if (command === 'foreground') {
      const result = prepareForegrounds(positionals, values.out, suite);
      for (const skip of result.skipped) {
        console.error(`skipped ${skip.id}: ${skip.reason}`);
      }
      console.log(
        `prepared ${result.prepared.length} foreground(s), ` +
          `skipped ${result.skipped.length}; manifest at ${result.manifestPath}`,
      );
      return result.prepared.length > 0 ? 0 : 2;
    }

    const result = prepareBackgrounds(positionals, values.out, suite, values.captions);
    console.log(
      `prepared ${result.prepared.length} background(s); manifest at ${result.manifestPath}`,
    );
    return 0;
  } catch (err) {
    if (err instanceof AssetPrepError) {
      console.error(`error: ${err.message}`);
      return 2;
    }
    if (err instanceof Error && 'code' in err && typeof err.code === 'string') {
      console.error(`error: ${err.message}`);
      return 2;
    }
    throw err;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === pathToFileURL(realpathSync(process.argv[1])).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
