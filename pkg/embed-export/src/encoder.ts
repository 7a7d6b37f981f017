// Sentence-encoder backends.
//
// The two production encoders run through @xenova/transformers (an
// optional add-on: `npm install @xenova/transformers`), with fixed
// inference settings (fp32, mean pooling, L2 normalization, no sampling)
// so a job re-run encodes to identical bytes. Tests and other callers may
// inject any object satisfying Encoder.

export interface Encoder {
    id: string; // recorded in the output header
    dim: number;
    encode(texts: string[]): Promise<number[][]>;
}

export type EncoderName = 'gte_large' | 'mpnet_base';

export const CHECKPOINTS: Record<EncoderName, { checkpoint: string; dim: number }> = {
    gte_large: { checkpoint: 'thenlper/gte-large', dim: 1024 },
    mpnet_base: { checkpoint: 'sentence-transformers/all-mpnet-base-v2', dim: 768 },
};

export class EncoderError extends Error {}

const BATCH_SIZE = 32;

export async function loadTransformerEncoder(name: EncoderName): Promise<Encoder> {
    const spec = CHECKPOINTS[name];
    if (!spec) {
        throw new EncoderError(`unknown encoder ${name}`);
    }
    let transformers: any;
    try {
        transformers = await import('@xenova/transformers' as string);
    } catch {
        throw new EncoderError(
            `encoder backend not installed; run "npm install @xenova/transformers" ` +
            `to enable ${spec.checkpoint}, or pass a custom Encoder`);
    }
    const pipe = await transformers.pipeline('feature-extraction', spec.checkpoint, {
        quantized: false,
    });
    return {
        id: `${spec.checkpoint} (fp32, mean-pool, normalized)`,
        dim: spec.dim,
        async encode(texts: string[]): Promise<number[][]> {
            const out: number[][] = [];
            for (let i = 0; i < texts.length; i += BATCH_SIZE) {
                const batch = texts.slice(i, i + BATCH_SIZE);
                const tensor = await pipe(batch, { pooling: 'mean', normalize: true });
                const [n, dim] = tensor.dims;
                const data: Float32Array = tensor.data;
                for (let row = 0; row < n; row++) {
                    // widen to float64 once here; the file is the contract
                    out.push(Array.from(data.slice(row * dim, (row + 1) * dim)));
                }
            }
            return out;
        },
    };
}

export async function encodeAll(encoder: Encoder, texts: string[]): Promise<number[][]> {
    const vectors = await encoder.encode(texts);
    if (vectors.length !== texts.length) {
        throw new EncoderError(
            `encoder returned ${vectors.length} vectors for ${texts.length} texts`);
    }
    for (const vec of vectors) {
        if (vec.length !== encoder.dim) {
            throw new EncoderError(
                `encoder ${encoder.id} produced dim ${vec.length}, declared ${encoder.dim}`);
        }
        for (const v of vec) {
            if (!Number.isFinite(v)) {
                throw new EncoderError(`encoder ${encoder.id} produced a non-finite value`);
            }
        }
    }
    return vectors;
}
