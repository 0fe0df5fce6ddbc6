// Service payload fixtures shaped exactly like docs/api.md, plus a stub
// fetch for hermetic tests.

import type { FetchLike, FetchResponseLike } from '../src/api.js';
import type {
  IterationDoc,
  MapDoc,
  SessionStatus,
  TokenUsage,
  TraceResponse,
  TraceRound,
} from '../src/types.js';

export function usage(prompt: number, completion: number, role: string): TokenUsage {
  return { prompt_tokens: prompt, completion_tokens: completion, agent_role: role };
}

export function status(overrides: Partial<SessionStatus> = {}): SessionStatus {
  return {
    session_id: 'S1',
    phase: 'done',
    created_at: 1723280000.0,
    prompt: 'mountain island',
    followups: [],
    rounds: 1,
    error: null,
    has_map: true,
    ...overrides,
  };
}

const planSteps = [
  {
    objective: 'generate the base',
    tool_name: 'gen_cellular_automata',
    arguments: { width: 8, height: 8, fill_probability: 0.5, iterations: 2 },
    expected_result: 'a blob',
    output_binding: 'base',
  },
  {
    objective: 'stack tiers',
    tool_name: 'build_height_layers',
    arguments: { base: '@base', tiers: 3, shrink_radius: 1 },
    expected_result: 'three tiers',
  },
];

export function iteration(overrides: Partial<IterationDoc> = {}): IterationDoc {
  return {
    revision: 0,
    trajectory: {
      trajectory_summary: 'grow a mountain and tier it',
      tool_plan: planSteps,
      risks: [],
      revision: 0,
    },
    trajectory_digest: 'abcdef0123456789abcdef0123456789',
    actor_prompt: 'PROMPT',
    critique: { decision: 'approve', blocking_issues: [], missing_information: [] },
    token_usage: usage(120, 30, 'total'),
    actor_usage: usage(120, 30, 'actor'),
    critic_usage: usage(0, 0, 'critic'),
    wall_time: 0.01,
    ...overrides,
  };
}

// Two iterations: a first proposal rejected on step 1, then an approved fix.
export function twoIterationRound(): TraceRound {
  const first = iteration({
    revision: 0,
    critique: {
      decision: 'revise',
      blocking_issues: [
        {
          dimension: 'parameter_correctness',
          description: 'tiers: value 99 outside [1, 16]',
          step_index: 1,
          correction_suggestion: 'use 3 tiers',
        },
      ],
      missing_information: [],
    },
    critic_usage: usage(0, 0, 'critic'),
  });
  const second = iteration({
    revision: 1,
    trajectory_digest: 'fedcba9876543210fedcba9876543210',
    actor_usage: usage(90, 25, 'actor'),
  });
  return {
    session_id: 'S1',
    iterations: [first, second],
    outcome: 'approved',
    final_trajectory: second.trajectory,
    final_validation: [],
    error: null,
    token_totals: usage(210, 55, 'total'),
  };
}

export function trace(rounds: TraceRound[]): TraceResponse {
  return { session_id: 'S1', rounds };
}

// A 4x4 map with three stacked tiers and placements: rocks strictly on
// dead base cells (off-mask), grass on the peak cell.
export function mapFixture(): MapDoc {
  return {
    format: 'map-artifact/1',
    layers: [
      {
        name: 'tier_0',
        height_index: 0,
        material: 'terrain',
        grid: { width: 4, height: 4, rows: ['####', '####', '##..', '....'] },
      },
      {
        name: 'tier_1',
        height_index: 1,
        material: 'terrain',
        grid: { width: 4, height: 4, rows: ['.##.', '.##.', '....', '....'] },
      },
      {
        name: 'tier_2',
        height_index: 2,
        material: 'terrain',
        grid: { width: 4, height: 4, rows: ['....', '..#.', '....', '....'] },
      },
    ],
    placements: [
      { kind: 'rock', x: 2, y: 2, layer_name: 'tier_0' },
      { kind: 'rock', x: 0, y: 3, layer_name: 'tier_0' },
      { kind: 'grass_spot', x: 2, y: 1, layer_name: 'tier_2' },
    ],
    seed: 42,
    provenance: 'deadbeefdeadbeefdeadbeefdeadbeef',
  };
}

// ---------------------------------------------------------------------------
// Stub service

export type Route = (init?: RequestInit) => { status: number; body: unknown };

export interface StubService {
  fetch: FetchLike;
  calls: { url: string; method: string; body?: unknown }[];
  routes: Map<string, Route[]>;
  on(method: string, path: string, ...responses: { status: number; body: unknown }[]): void;
}

export function stubService(): StubService {
  const routes = new Map<string, Route[]>();
  const calls: StubService['calls'] = [];

  const service: StubService = {
    calls,
    routes,
    on(method, path, ...responses) {
      routes.set(
        `${method} ${path}`,
        responses.map((r) => () => r),
      );
    },
    fetch: async (url: string, init?: RequestInit): Promise<FetchResponseLike> => {
      const method = init?.method ?? 'GET';
      calls.push({
        url,
        method,
        body: init?.body ? JSON.parse(init.body as string) : undefined,
      });
      const queue = routes.get(`${method} ${url}`);
      if (!queue || queue.length === 0) {
        return { ok: false, status: 404, json: async () => ({ detail: `no stub for ${method} ${url}` }) };
      }
      const route = queue.length > 1 ? (queue.shift() as Route) : queue[0];
      const { status: code, body } = route(init);
      return { ok: code >= 200 && code < 300, status: code, json: async () => body };
    },
  };
  return service;
}
