import { describe, expect, it } from 'vitest';

import { ApiError, StudioApi } from '../src/api.js';
import { mapFixture, status, stubService } from './fixtures.js';

describe('StudioApi', () => {
  it('creates sessions and returns the id', async () => {
    const service = stubService();
    service.on('POST', '/sessions', { status: 201, body: { session_id: 'S1' } });
    const api = new StudioApi('', service.fetch);
    const created = await api.createSession('a mountain');
    expect(created.session_id).toBe('S1');
    expect(service.calls[0].body).toEqual({ prompt: 'a mountain' });
  });

  it('fetches status and map payloads', async () => {
    const service = stubService();
    service.on('GET', '/sessions/S1', { status: 200, body: status() });
    service.on('GET', '/sessions/S1/map', { status: 200, body: mapFixture() });
    const api = new StudioApi('', service.fetch);
    expect((await api.status('S1')).phase).toBe('done');
    expect((await api.map('S1')).layers).toHaveLength(3);
  });

  it('surfaces 422 validation errors with field paths', async () => {
    const service = stubService();
    service.on('POST', '/sessions', {
      status: 422,
      body: {
        detail: [
          { loc: ['body', 'prompt'], msg: 'String should have at least 1 character' },
        ],
      },
    });
    const api = new StudioApi('', service.fetch);
    const error = await api.createSession('').catch((e) => e as ApiError);
    expect(error).toBeInstanceOf(ApiError);
    expect(error.status).toBe(422);
    expect(error.fieldErrors).toEqual([
      { field: 'prompt', message: 'String should have at least 1 character' },
    ]);
  });

  it('surfaces 409 round-in-flight conflicts', async () => {
    const service = stubService();
    service.on('POST', '/sessions/S1/followup', {
      status: 409,
      body: { detail: 'session S1 has a round in flight' },
    });
    const api = new StudioApi('', service.fetch);
    const error = await api.followup('S1', 'more').catch((e) => e as ApiError);
    expect(error).toBeInstanceOf(ApiError);
    expect(error.status).toBe(409);
    expect(error.message).toContain('in flight');
  });

  it('surfaces 404s for missing maps', async () => {
    const service = stubService();
    service.on('GET', '/sessions/S1/map', { status: 404, body: { detail: 'no map yet' } });
    const api = new StudioApi('', service.fetch);
    const error = await api.map('S1').catch((e) => e as ApiError);
    expect(error.status).toBe(404);
  });
});
