// Raw intent-dataset ingestion and published-size validation.
//
// Expected on-disk layout (see README for how to produce it from the
// upstream releases):
//
//   <dataDir>/<dataset>/train.tsv        text<TAB>intent        (in-scope only)
//   <dataDir>/<dataset>/test.tsv         text<TAB>intent|oos
//   <dataDir>/<dataset>/oos_pool.tsv     text<TAB>oos           (optional)
//
// The in-scope intent set is always derived from the training labels, so
// conflicting published intent counts resolve to whatever the data
// actually contains; the resolved counts land in the output header.

import * as fs from 'node:fs';
import * as path from 'node:path';

import { OOS_LABEL } from './format.js';

export type DatasetName = 'banking77_oos' | 'clinc_banking' | 'clinc_credit_cards';

export interface RawExample {
    text: string;
    label: string; // intent name, or literal "oos"
}

export interface RawDataset {
    name: DatasetName;
    train: RawExample[];
    test: RawExample[];
    oosPool: RawExample[];
    inScopeIntents: string[]; // sorted; index = class id
}

export interface ExpectedCounts {
    train: number;
    test: number;
    testOos: number;
}

export interface DatasetSpec {
    domain: string;
    expected: ExpectedCounts;
}

export const DATASETS: Record<DatasetName, DatasetSpec> = {
    banking77_oos: {
        domain: 'Banking',
        expected: { train: 5095, test: 3080, testOos: 1080 },
    },
    clinc_banking: {
        domain: 'Banking',
        expected: { train: 500, test: 850, testOos: 350 },
    },
    clinc_credit_cards: {
        domain: 'Credit cards',
        expected: { train: 500, test: 850, testOos: 350 },
    },
};

export class DatasetError extends Error {}

function parseTsv(filePath: string): RawExample[] {
    let raw: string;
    try {
        raw = fs.readFileSync(filePath, 'utf-8');
    } catch (err) {
        throw new DatasetError(`cannot read ${filePath}: ${(err as Error).message}`);
    }
    const out: RawExample[] = [];
    const lines = raw.split('\n');
    for (let i = 0; i < lines.length; i++) {
        const line = lines[i];
        if (line.trim() === '') {
            continue;
        }
        const tab = line.indexOf('\t');
        if (tab <= 0 || tab === line.length - 1) {
            throw new DatasetError(`${filePath}:${i + 1}: expected text<TAB>label`);
        }
        const text = line.slice(0, tab).trim();
        const label = line.slice(tab + 1).trim();
        if (!text || !label) {
            throw new DatasetError(`${filePath}:${i + 1}: empty text or label`);
        }
        out.push({ text, label });
    }
    return out;
}

export function loadRawDataset(dataDir: string, name: DatasetName): RawDataset {
    if (!(name in DATASETS)) {
        throw new DatasetError(`unknown dataset ${name}`);
    }
    const base = path.join(dataDir, name);
    const train = parseTsv(path.join(base, 'train.tsv'));
    const test = parseTsv(path.join(base, 'test.tsv'));
    const oosPath = path.join(base, 'oos_pool.tsv');
    const oosPool = fs.existsSync(oosPath) ? parseTsv(oosPath) : [];

    for (const ex of train) {
        if (ex.label === OOS_LABEL) {
            throw new DatasetError(`${name}: train.tsv contains an ${OOS_LABEL} row`);
        }
    }
    for (const ex of oosPool) {
        if (ex.label !== OOS_LABEL) {
            throw new DatasetError(`${name}: oos_pool.tsv must only contain ${OOS_LABEL} rows`);
        }
    }
    const intents = [...new Set(train.map((ex) => ex.label))].sort();
    for (const ex of test) {
        if (ex.label !== OOS_LABEL && !intents.includes(ex.label)) {
            throw new DatasetError(
                `${name}: test label ${ex.label} never appears in training data`);
        }
    }
    return { name, train, test, oosPool, inScopeIntents: intents };
}

export function validateCounts(ds: RawDataset): void {
    const expected = DATASETS[ds.name].expected;
    const found: ExpectedCounts = {
        train: ds.train.length,
        test: ds.test.length,
        testOos: ds.test.filter((ex) => ex.label === OOS_LABEL).length,
    };
    const problems: string[] = [];
    for (const key of ['train', 'test', 'testOos'] as const) {
        if (found[key] !== expected[key]) {
            problems.push(`${key}: expected ${expected[key]}, found ${found[key]}`);
        }
    }
    if (problems.length > 0) {
        throw new DatasetError(`${ds.name}: split sizes do not match the published ` +
            `dataset (${problems.join('; ')})`);
    }
}
