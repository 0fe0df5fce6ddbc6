import type { MapDoc, Phase, SessionStatus, TraceResponse } from './types.js';

// The view state is nothing but the last-fetched service responses plus
// the composer's unsent text and per-layer visibility preferences. Every
// pane re-renders from this object; there is no derived cache to drift.
export interface ViewState {
  sessionId: string | null;
  status: SessionStatus | null;
  trace: TraceResponse | null;
  map: MapDoc | null;
  composerText: string;
  composerError: string | null;
  visibleLayers: Record<string, boolean>;
}

export function initialState(): ViewState {
  return {
    sessionId: null,
    status: null,
    trace: null,
    map: null,
    composerText: '',
    composerError: null,
    visibleLayers: {},
  };
}

export function phase(state: ViewState): Phase | null {
  return state.status?.phase ?? null;
}

export function roundInFlight(state: ViewState): boolean {
  const p = phase(state);
  return p === 'refining' || p === 'executing';
}

// The composer accepts input when no session exists yet, or when the
// current session is settled (mirrors the service's 409 rule).
export function canCompose(state: ViewState): boolean {
  return !roundInFlight(state);
}

export function traceCount(state: ViewState): number {
  return state.trace?.rounds.length ?? 0;
}

export function applyStatus(state: ViewState, status: SessionStatus): ViewState {
  return { ...state, sessionId: status.session_id, status };
}

export function applyTrace(state: ViewState, trace: TraceResponse): ViewState {
  return { ...state, trace };
}

export function applyMap(state: ViewState, map: MapDoc | null): ViewState {
  const visibleLayers: Record<string, boolean> = {};
  if (map) {
    for (const layer of map.layers) {
      // New layers default to visible; existing toggles survive refreshes.
      visibleLayers[layer.name] = state.visibleLayers[layer.name] ?? true;
    }
  }
  return { ...state, map, visibleLayers };
}

export function toggleLayer(state: ViewState, name: string): ViewState {
  return {
    ...state,
    visibleLayers: { ...state.visibleLayers, [name]: !(state.visibleLayers[name] ?? true) },
  };
}

export function setComposerText(state: ViewState, text: string): ViewState {
  return { ...state, composerText: text };
}

export function setComposerError(state: ViewState, error: string | null): ViewState {
  return { ...state, composerError: error };
}

export function startNewSession(state: ViewState): ViewState {
  // Submitting a brand-new prompt drops the previous session's panes.
  return { ...initialState(), composerText: state.composerText };
}
