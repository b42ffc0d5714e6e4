import { describe, expect, it } from 'vitest';

import { ApiClient, ApiRequestError } from '../src/api';

interface Recorded {
  url: string;
  method?: string;
  body?: unknown;
}

function stubClient(status: number, body: unknown) {
  const calls: Recorded[] = [];
  const client = new ApiClient('http://svc', async (url, init) => {
    calls.push({
      url,
      method: init?.method,
      body: init?.body ? JSON.parse(init.body as string) : undefined,
    });
    return {
      ok: status < 400,
      status,
      json: async () => body,
    } as Response;
  });
  return { client, calls };
}

describe('ApiClient', () => {
  it('lists models from GET /models', async () => {
    const { client, calls } = stubClient(200, [{ name: 'a' }]);
    const models = await client.listModels();
    expect(models).toEqual([{ name: 'a' }]);
    expect(calls[0]!.url).toBe('http://svc/models');
  });

  it('posts synthesize step payloads in wire format', async () => {
    const { client, calls } = stubClient(200, { status: 'optimal' });
    await client.synthesizeStep('ctrl', { oat: 30 }, { penalty: 0 });
    expect(calls[0]).toMatchObject({
      url: 'http://svc/synthesize/step',
      method: 'POST',
      body: { model: 'ctrl', x_d: { oat: 30 }, config: { penalty: 0 } },
    });
  });

  it('url-encodes model and event names', async () => {
    const { client, calls } = stubClient(200, {});
    await client.modelMeta('a b');
    await client.eventTrace('7');
    expect(calls[0]!.url).toBe('http://svc/models/a%20b');
    expect(calls[1]!.url).toBe('http://svc/events/7/trace');
  });

  it('wraps error bodies in ApiRequestError', async () => {
    const { client } = stubClient(404, {
      code: 'not_found',
      message: "unknown model 'ghost'",
    });
    await expect(client.modelMeta('ghost')).rejects.toThrowError(
      ApiRequestError,
    );
    try {
      await client.modelMeta('ghost');
    } catch (err) {
      const e = err as ApiRequestError;
      expect(e.status).toBe(404);
      expect(e.body.code).toBe('not_found');
    }
  });
});
