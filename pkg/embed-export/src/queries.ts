// Descriptor-query sources.
//
// Class descriptors can be raw intent names ("naive"), one pre-generated
// query per intent loaded from a versioned fixture file (the default,
// reproducible path), or queries fetched live from an LLM endpoint
// (nondeterministic; flagged in the output header). The fixture files in
// fixtures/generated-queries/ were produced once with the prompt template
// below and can be regenerated with any chat model.

import * as fs from 'node:fs';

export const QUERY_PROMPT_TEMPLATE =
    'Generate queries that someone would ask a chatbot in [DOMAIN]. ' +
    'Generate one-sentence queries for each of the following topics: [TOPICS].';

export class QueryError extends Error {}

export function renderQueryPrompt(domain: string, topics: string[]): string {
    if (topics.length === 0) {
        throw new QueryError('no topics to render into the prompt');
    }
    return QUERY_PROMPT_TEMPLATE
        .replace('[DOMAIN]', domain)
        .replace('[TOPICS]', topics.join(', '));
}

// Fixture format: {"<intent>": "<one-sentence query>", ...}. Every in-scope
// intent must be present exactly once; extra keys (e.g. for other splits of
// the same corpus) are ignored.
export function loadGeneratedQueries(filePath: string,
                                     inScopeIntents: string[]): Map<string, string> {
    let raw: unknown;
    try {
        raw = JSON.parse(fs.readFileSync(filePath, 'utf-8'));
    } catch (err) {
        throw new QueryError(`cannot read queries file ${filePath}: ${(err as Error).message}`);
    }
    if (typeof raw !== 'object' || raw === null || Array.isArray(raw)) {
        throw new QueryError(`${filePath}: expected an object mapping intent to query`);
    }
    const table = raw as Record<string, unknown>;
    const out = new Map<string, string>();
    const missing: string[] = [];
    for (const intent of inScopeIntents) {
        const q = table[intent];
        if (typeof q !== 'string' || q.trim() === '') {
            missing.push(intent);
        } else {
            out.set(intent, q.trim());
        }
    }
    if (missing.length > 0) {
        throw new QueryError(
            `${filePath}: missing generated queries for ${missing.length} in-scope ` +
            `intent(s): ${missing.join(', ')} — regenerate with the documented ` +
            `prompt template`);
    }
    return out;
}

export interface EndpointOptions {
    endpoint?: string; // default: EMBED_EXPORT_LLM_ENDPOINT
    apiKey?: string;   // default: EMBED_EXPORT_LLM_API_KEY
    model?: string;
}

// Calls an OpenAI-style chat-completions endpoint with the documented
// template and expects one numbered line per topic in order.
export async function generateViaEndpoint(domain: string, topics: string[],
                                          opts: EndpointOptions = {}): Promise<Map<string, string>> {
    const endpoint = opts.endpoint ?? process.env.EMBED_EXPORT_LLM_ENDPOINT;
    const apiKey = opts.apiKey ?? process.env.EMBED_EXPORT_LLM_API_KEY;
    if (!endpoint) {
        throw new QueryError(
            'no LLM endpoint configured: set EMBED_EXPORT_LLM_ENDPOINT or use a ' +
            'generated-queries fixture file');
    }
    const prompt = renderQueryPrompt(domain, topics);
    const headers: Record<string, string> = { 'content-type': 'application/json' };
    if (apiKey) {
        headers.authorization = `Bearer ${apiKey}`;
    }
    const response = await fetch(endpoint, {
        method: 'POST',
        headers,
        body: JSON.stringify({
            model: opts.model ?? 'gpt-3.5-turbo',
            messages: [{ role: 'user', content: prompt }],
            temperature: 0,
        }),
    });
    if (!response.ok) {
        throw new QueryError(`LLM endpoint returned ${response.status}`);
    }
    const payload = (await response.json()) as {
        choices?: { message?: { content?: string } }[];
    };
    const content = payload.choices?.[0]?.message?.content;
    if (!content) {
        throw new QueryError('LLM endpoint response had no message content');
    }
    return parseNumberedQueries(content, topics);
}

export function parseNumberedQueries(content: string, topics: string[]): Map<string, string> {
    const lines = content
        .split('\n')
        .map((l) => l.replace(/^\s*\d+[.)]\s*/, '').trim())
        .filter((l) => l !== '');
    if (lines.length !== topics.length) {
        throw new QueryError(
            `expected ${topics.length} generated queries, parsed ${lines.length}`);
    }
    const out = new Map<string, string>();
    topics.forEach((topic, i) => out.set(topic, lines[i]));
    return out;
}
