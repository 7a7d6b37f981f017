#!/usr/bin/env node
// CLI: export --dataset <name> --encoder <name> --descriptors <mode> --out <path>
//      --data-dir <path> [--queries-file <path>]
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 runtime error.

import * as path from 'node:path';
import { fileURLToPath } from 'node:url';

import { DATASETS, DatasetError, DatasetName } from './datasets.js';
import { CHECKPOINTS, EncoderName } from './encoder.js';
import { FormatError } from './format.js';
import { QueryError } from './queries.js';
import { DescriptorSource, ExportError, runExport } from './export.js';

const USAGE = `usage: embed-export export --dataset <name> --encoder <name> \\
       --descriptors <mode> --out <path> --data-dir <path> [--queries-file <path>]

  --dataset      ${Object.keys(DATASETS).join(' | ')}
  --encoder      ${Object.keys(CHECKPOINTS).join(' | ')}
  --descriptors  naive_names | generated_queries_file | llm_endpoint
  --out          output embedding file
  --data-dir     directory containing <dataset>/train.tsv etc. (see README)
  --queries-file generated-queries JSON (defaults to the checked-in fixture
                 for the dataset when --descriptors generated_queries_file)

environment: EMBED_EXPORT_LLM_ENDPOINT / EMBED_EXPORT_LLM_API_KEY for the
llm_endpoint descriptor source.`;

class UsageError extends Error {}

function parseArgs(argv: string[]): Record<string, string> {
    const out: Record<string, string> = {};
    for (let i = 0; i < argv.length; i++) {
        const arg = argv[i];
        if (!arg.startsWith('--')) {
            throw new UsageError(`unexpected argument ${arg}`);
        }
        const key = arg.slice(2);
        const value = argv[i + 1];
        if (value === undefined || value.startsWith('--')) {
            throw new UsageError(`missing value for --${key}`);
        }
        out[key] = value;
        i++;
    }
    return out;
}

function requireChoice<T extends string>(args: Record<string, string>, key: string,
                                         choices: readonly T[]): T {
    const value = args[key];
    if (!value) {
        throw new UsageError(`missing --${key}`);
    }
    if (!choices.includes(value as T)) {
        throw new UsageError(`--${key} must be one of ${choices.join(', ')}, got ${value}`);
    }
    return value as T;
}

function defaultQueriesFixture(dataset: DatasetName): string {
    const here = path.dirname(fileURLToPath(import.meta.url));
    // dist/src/cli.js -> ../../fixtures
    return path.join(here, '..', '..', 'fixtures', 'generated-queries', `${dataset}.json`);
}

export async function main(argv: string[]): Promise<number> {
    try {
        if (argv.length === 0 || argv[0] === '--help' || argv[0] === '-h') {
            console.log(USAGE);
            return 0;
        }
        if (argv[0] !== 'export') {
            throw new UsageError(`unknown command ${argv[0]}`);
        }
        const args = parseArgs(argv.slice(1));
        const dataset = requireChoice(args, 'dataset',
            Object.keys(DATASETS) as DatasetName[]);
        const encoder = requireChoice(args, 'encoder',
            Object.keys(CHECKPOINTS) as EncoderName[]);
        const descriptors = requireChoice(args, 'descriptors',
            ['naive_names', 'generated_queries_file', 'llm_endpoint'] as const) as DescriptorSource;
        if (!args.out) {
            throw new UsageError('missing --out');
        }
        if (!args['data-dir']) {
            throw new UsageError('missing --data-dir');
        }
        let queriesFile = args['queries-file'];
        if (descriptors === 'generated_queries_file' && !queriesFile) {
            queriesFile = defaultQueriesFixture(dataset);
        }
        const report = await runExport({
            dataset,
            encoder,
            descriptorSource: descriptors,
            outputPath: args.out,
            dataDir: args['data-dir'],
            queriesFile,
        });
        console.log(`wrote ${report.outputPath}`);
        console.log(`  dim=${report.dim} in_scope_intents=${report.inScopeIntents} ` +
            `deterministic=${report.deterministic}`);
        console.log(`  train_pool=${report.counts.train} oos_pool=${report.counts.oosPool} ` +
            `test=${report.counts.test} (oos in test: ${report.counts.testOos})`);
        console.log('verify with: coldstart validate --dataset ' + report.outputPath);
        return 0;
    } catch (err) {
        if (err instanceof UsageError) {
            console.error(`usage error: ${err.message}`);
            console.error(USAGE);
            return 1;
        }
        if (err instanceof DatasetError || err instanceof FormatError
            || err instanceof QueryError || err instanceof ExportError) {
            console.error(`data error: ${err.message}`);
            return 2;
        }
        console.error(`error: ${(err as Error).message}`);
        return 3;
    }
}

const entry = process.argv[1] ? path.resolve(process.argv[1]) : '';
if (entry === fileURLToPath(import.meta.url)) {
    main(process.argv.slice(2)).then((code) => {
        process.exitCode = code;
    });
}
