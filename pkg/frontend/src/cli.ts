#!/usr/bin/env node
import { writeFileSync } from 'fs';
import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';
import { BundleError } from './bundle';
import { buildConvergenceFigure, buildTightnessFigure, Figure } from './figures';

export function run(argv: string[]): number {
  const args = yargs(argv)
    .scriptName('plot-tool')
    .command('convergence', 'render error-vs-iteration curves, one per epsilon')
    .command('tightness', 'render the bound-tightness gap vs epsilon')
    .demandCommand(1, 'specify a figure kind: convergence or tightness')
    .option('bundle', { type: 'string', demandOption: true, describe: 'result bundle directory' })
    .option('out', { type: 'string', demandOption: true, describe: 'SVG file to write' })
    .option('linear', { type: 'boolean', default: false, describe: 'linear y axis (convergence only)' })
    .strict()
    .exitProcess(false)
    .fail((msg) => {
      throw new BundleError(msg);
    })
    .parseSync();

  const kind = String(args._[0]);
  let figure: Figure;
  if (kind === 'convergence') {
    figure = buildConvergenceFigure(args.bundle, args.linear);
  } else if (kind === 'tightness') {
    figure = buildTightnessFigure(args.bundle);
  } else {
    throw new BundleError(`unknown figure kind ${JSON.stringify(kind)}`);
  }
  writeFileSync(args.out, figure.svg);
  for (const warning of figure.warnings) {
    process.stderr.write(`warning: ${warning}\n`);
  }
  process.stdout.write(`wrote ${args.out} (${figure.curveLabels.length} series)\n`);
  return 0;
}

/* istanbul ignore next */
if (require.main === module) {
  try {
    process.exitCode = run(hideBin(process.argv));
  } catch (err) {
    if (err instanceof BundleError) {
      process.stderr.write(`error: ${err.message}\n`);
      process.exitCode = 1;
    } else {
      throw err;
    }
  }
}
