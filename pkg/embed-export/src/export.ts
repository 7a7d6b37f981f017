// Export pipeline: raw dataset -> validated, encoded embedding file.
//
// Stages: load the raw splits, enforce the published split sizes, resolve
// descriptor texts (naive names / fixture queries / live endpoint), encode
// everything with one encoder, and atomically write the line-JSON file the
// detection toolkit consumes. Provenance (checkpoint, descriptor source,
// resolved counts, determinism) is recorded in the header.

import { DATASETS, DatasetName, RawDataset, loadRawDataset, validateCounts } from './datasets.js';
import { Encoder, EncoderName, encodeAll, loadTransformerEncoder } from './encoder.js';
import { DescriptorRecord, Header, ItemRecord, OOS_LABEL, formatFile, writeAtomic } from './format.js';
import { generateViaEndpoint, loadGeneratedQueries } from './queries.js';

export type DescriptorSource = 'naive_names' | 'generated_queries_file' | 'llm_endpoint';

export interface ExportJob {
    dataset: DatasetName;
    encoder: EncoderName;
    descriptorSource: DescriptorSource;
    outputPath: string;
    dataDir: string;
    queriesFile?: string; // required for generated_queries_file
}

export interface ExportReport {
    outputPath: string;
    dim: number;
    inScopeIntents: number;
    counts: { descriptors: number; train: number; oosPool: number; test: number; testOos: number };
    deterministic: boolean;
}

export class ExportError extends Error {}

export function naiveName(intent: string): string {
    return intent.replace(/_/g, ' ');
}

async function descriptorTexts(job: ExportJob, raw: RawDataset,
                               domain: string): Promise<{ texts: string[]; deterministic: boolean }> {
    const intents = raw.inScopeIntents;
    switch (job.descriptorSource) {
        case 'naive_names':
            return { texts: intents.map(naiveName), deterministic: true };
        case 'generated_queries_file': {
            if (!job.queriesFile) {
                throw new ExportError('descriptorSource generated_queries_file needs queriesFile');
            }
            const table = loadGeneratedQueries(job.queriesFile, intents);
            return { texts: intents.map((i) => table.get(i)!), deterministic: true };
        }
        case 'llm_endpoint': {
            const table = await generateViaEndpoint(domain, intents);
            return { texts: intents.map((i) => table.get(i)!), deterministic: false };
        }
        default:
            throw new ExportError(`unknown descriptor source ${job.descriptorSource}`);
    }
}

export async function runExport(job: ExportJob,
                                injectedEncoder?: Encoder): Promise<ExportReport> {
    const spec = DATASETS[job.dataset];
    if (!spec) {
        throw new ExportError(`unknown dataset ${job.dataset}`);
    }
    const raw = loadRawDataset(job.dataDir, job.dataset);
    validateCounts(raw);

    const { texts: descTexts, deterministic } =
        await descriptorTexts(job, raw, spec.domain);
    const encoder = injectedEncoder ?? await loadTransformerEncoder(job.encoder);

    // one flat encode keeps batching simple; slices index back into it
    const allTexts = [
        ...descTexts,
        ...raw.train.map((ex) => ex.text),
        ...raw.oosPool.map((ex) => ex.text),
        ...raw.test.map((ex) => ex.text),
    ];
    const vectors = await encodeAll(encoder, allTexts);
    let cursor = 0;
    const take = (n: number) => vectors.slice(cursor, (cursor += n));
    const descVecs = take(descTexts.length);
    const trainVecs = take(raw.train.length);
    const oosVecs = take(raw.oosPool.length);
    const testVecs = take(raw.test.length);

    const classIds = new Map(raw.inScopeIntents.map((intent, i) => [intent, i]));
    const descriptors: DescriptorRecord[] = raw.inScopeIntents.map((intent, i) => ({
        kind: 'descriptor', class_id: i, name: intent, vector: descVecs[i],
    }));

    const items: ItemRecord[] = [];
    raw.train.forEach((ex, i) => items.push({
        kind: 'item', item_id: `train-${i.toString().padStart(5, '0')}`,
        split: 'train_pool', label: classIds.get(ex.label)!,
        vector: trainVecs[i], text: ex.text,
    }));
    raw.oosPool.forEach((ex, i) => items.push({
        kind: 'item', item_id: `oos-${i.toString().padStart(5, '0')}`,
        split: 'oos_pool', label: OOS_LABEL, vector: oosVecs[i], text: ex.text,
    }));
    raw.test.forEach((ex, i) => items.push({
        kind: 'item', item_id: `test-${i.toString().padStart(5, '0')}`,
        split: 'test',
        label: ex.label === OOS_LABEL ? OOS_LABEL : classIds.get(ex.label)!,
        vector: testVecs[i], text: ex.text,
    }));

    const testOos = raw.test.filter((ex) => ex.label === OOS_LABEL).length;
    const header: Header = {
        format_version: 1,
        dim: encoder.dim,
        encoder: encoder.id,
        domain: spec.domain,
        dataset: job.dataset,
        descriptor_source: job.descriptorSource,
        deterministic,
        resolved_counts: {
            in_scope_intents: raw.inScopeIntents.length,
            train_pool: raw.train.length,
            oos_pool: raw.oosPool.length,
            test: raw.test.length,
            test_oos: testOos,
        },
    };
    writeAtomic(job.outputPath, formatFile(header, descriptors, items));
    return {
        outputPath: job.outputPath,
        dim: encoder.dim,
        inScopeIntents: raw.inScopeIntents.length,
        counts: {
            descriptors: descriptors.length,
            train: raw.train.length,
            oosPool: raw.oosPool.length,
            test: raw.test.length,
            testOos,
        },
        deterministic,
    };
}
