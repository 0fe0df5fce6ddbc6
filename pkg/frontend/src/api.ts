import type { MapDoc, SessionStatus, ToolsResponse, TraceResponse } from './types.js';

// Minimal slice of fetch we rely on, so tests can stub it with plain objects.
export interface FetchResponseLike {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<FetchResponseLike>;

export interface FieldError {
  field: string;
  message: string;
}

export class ApiError extends Error {
  status: number;
  fieldErrors: FieldError[];

  constructor(status: number, message: string, fieldErrors: FieldError[] = []) {
    super(message);
    this.status = status;
    this.fieldErrors = fieldErrors;
  }
}

function extractFieldErrors(detail: unknown): FieldError[] {
  // FastAPI 422 bodies: {"detail": [{"loc": ["body", "prompt"], "msg": ...}]}
  if (!Array.isArray(detail)) return [];
  return detail.map((item) => {
    const entry = item as { loc?: unknown[]; msg?: string };
    const loc = Array.isArray(entry.loc) ? entry.loc.filter((p) => p !== 'body') : [];
    return { field: loc.join('.'), message: entry.msg ?? 'invalid value' };
  });
}

async function raiseForStatus(response: FetchResponseLike): Promise<void> {
  if (response.ok) return;
  let detail: unknown = null;
  try {
    detail = ((await response.json()) as { detail?: unknown }).detail;
  } catch {
    // non-JSON error body; fall through with the status alone
  }
  const message = typeof detail === 'string' ? detail : `request failed (${response.status})`;
  throw new ApiError(response.status, message, extractFieldErrors(detail));
}

export interface SessionConfigDoc {
  actor?: Record<string, unknown>;
  critic?: Record<string, unknown>;
  max_iterations?: number;
  seed?: number;
}

export class StudioApi {
  private base: string;
  private fetchFn: FetchLike;

  constructor(base = '', fetchFn?: FetchLike) {
    this.base = base.replace(/\/$/, '');
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  private async get<T>(path: string): Promise<T> {
    const response = await this.fetchFn(`${this.base}${path}`);
    await raiseForStatus(response);
    return (await response.json()) as T;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchFn(`${this.base}${path}`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
    await raiseForStatus(response);
    return (await response.json()) as T;
  }

  createSession(prompt: string, config?: SessionConfigDoc): Promise<{ session_id: string }> {
    const body: Record<string, unknown> = { prompt };
    if (config) body.config = config;
    return this.post('/sessions', body);
  }

  followup(sessionId: string, prompt: string): Promise<{ session_id: string; round: number }> {
    return this.post(`/sessions/${sessionId}/followup`, { prompt });
  }

  status(sessionId: string): Promise<SessionStatus> {
    return this.get(`/sessions/${sessionId}`);
  }

  trace(sessionId: string): Promise<TraceResponse> {
    return this.get(`/sessions/${sessionId}/trace`);
  }

  map(sessionId: string): Promise<MapDoc> {
    return this.get(`/sessions/${sessionId}/map`);
  }

  tools(): Promise<ToolsResponse> {
    return this.get('/tools');
  }
}
