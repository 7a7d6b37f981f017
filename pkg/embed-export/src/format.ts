// Embedding-file emission in the coldstart line-JSON format.
//
// The format is the contract between this exporter and the detection
// toolkit: one JSON object per line, header first, then descriptor and
// item records. Numbers serialize as shortest-round-trip decimals
// (JSON.stringify), which float64 consumers parse back bit-identically.

import * as fs from 'node:fs';
import * as path from 'node:path';

export type Split = 'train_pool' | 'oos_pool' | 'test';
export const OOS_LABEL = 'oos';

export interface Header {
    format_version: 1;
    dim: number;
    encoder: string;
    domain: string;
    // extra provenance keys (checkpoint, pooling, resolved counts, ...)
    // are allowed and ignored by the consumer
    [extra: string]: unknown;
}

export interface DescriptorRecord {
    kind: 'descriptor';
    class_id: number;
    name: string;
    vector: number[];
}

export interface ItemRecord {
    kind: 'item';
    item_id: string;
    split: Split;
    label: number | typeof OOS_LABEL;
    vector: number[];
    text?: string;
}

export class FormatError extends Error {}

function checkVector(vector: number[], dim: number, owner: string): void {
    if (vector.length !== dim) {
        throw new FormatError(`${owner}: vector length ${vector.length} != dim ${dim}`);
    }
    for (const v of vector) {
        if (!Number.isFinite(v)) {
            throw new FormatError(`${owner}: non-finite coordinate`);
        }
    }
}

export function formatFile(header: Header, descriptors: DescriptorRecord[],
                           items: ItemRecord[]): string {
    if (header.format_version !== 1) {
        throw new FormatError(`unsupported format_version ${header.format_version}`);
    }
    if (!Number.isInteger(header.dim) || header.dim < 1) {
        throw new FormatError(`dim must be a positive integer, got ${header.dim}`);
    }
    if (descriptors.length === 0) {
        throw new FormatError('at least one descriptor is required');
    }
    const ids = descriptors.map((d) => d.class_id).sort((a, b) => a - b);
    ids.forEach((id, i) => {
        if (id !== i) {
            throw new FormatError(`class ids must be contiguous 0..K-1, got ${ids.join(',')}`);
        }
    });
    const lines: string[] = [JSON.stringify(header)];
    const byId = [...descriptors].sort((a, b) => a.class_id - b.class_id);
    for (const d of byId) {
        checkVector(d.vector, header.dim, `descriptor ${d.name}`);
        lines.push(JSON.stringify({
            kind: 'descriptor', class_id: d.class_id, name: d.name, vector: d.vector,
        }));
    }
    for (const it of items) {
        checkVector(it.vector, header.dim, `item ${it.item_id}`);
        if (it.split === 'train_pool' && it.label === OOS_LABEL) {
            throw new FormatError(`item ${it.item_id}: train_pool items must be in-scope`);
        }
        if (it.split === 'oos_pool' && it.label !== OOS_LABEL) {
            throw new FormatError(`item ${it.item_id}: oos_pool items must be labeled ${OOS_LABEL}`);
        }
        const rec: Record<string, unknown> = {
            kind: 'item', item_id: it.item_id, split: it.split,
            label: it.label, vector: it.vector,
        };
        if (it.text !== undefined) {
            rec.text = it.text;
        }
        lines.push(JSON.stringify(rec));
    }
    return lines.join('\n') + '\n';
}

// Write via temp file + rename so a crash never leaves a half-written file.
export function writeAtomic(filePath: string, content: string): void {
    const dir = path.dirname(filePath);
    fs.mkdirSync(dir, { recursive: true });
    const tmp = path.join(dir, `.${path.basename(filePath)}.tmp-${process.pid}`);
    fs.writeFileSync(tmp, content, 'utf-8');
    fs.renameSync(tmp, filePath);
}
