import type { StudioApi } from './api.js';
import { buildComposer, composerErrorFrom, updateComposer, type ComposerElements } from './composer.js';
import { renderMapView } from './map_view.js';
import { Poller } from './poll.js';
import {
  applyMap,
  applyStatus,
  applyTrace,
  canCompose,
  initialState,
  roundInFlight,
  setComposerError,
  startNewSession,
  toggleLayer,
  type ViewState,
} from './state.js';
import { renderTrace } from './trace_view.js';

export interface AppElements {
  phaseChip: HTMLElement;
  composerRoot: HTMLElement;
  traceRoot: HTMLElement;
  mapRoot: HTMLElement;
}

export interface App {
  submit(text: string): Promise<void>;
  refresh(): Promise<boolean>;
  render(): void;
  state(): ViewState;
  composer: ComposerElements;
  poller: Poller;
}

// One app instance owns the view state and re-renders every pane from it.
// All data comes from the service payloads; the UI adds nothing.
export function createApp(elements: AppElements, api: StudioApi, pollIntervalMs = 1000): App {
  let state: ViewState = initialState();

  async function refresh(): Promise<boolean> {
    const sessionId = state.sessionId;
    if (!sessionId) return false;
    const status = await api.status(sessionId);
    state = applyStatus(state, status);
    try {
      state = applyTrace(state, await api.trace(sessionId));
    } catch {
      // trace may briefly 404 right after session creation
    }
    if (status.has_map) {
      try {
        state = applyMap(state, await api.map(sessionId));
      } catch {
        // map 404s until the session is done
      }
    }
    render();
    return roundInFlight(state);
  }

  const poller = new Poller(refresh, pollIntervalMs);

  async function submit(text: string): Promise<void> {
    state = setComposerError(state, null);
    const sessionId = state.sessionId;
    try {
      if (sessionId && canCompose(state)) {
        await api.followup(sessionId, text);
      } else {
        state = startNewSession(state);
        const created = await api.createSession(text);
        state = { ...state, sessionId: created.session_id };
      }
      composer.input.value = '';
      await refresh();
      poller.start();
    } catch (error) {
      state = setComposerError(state, composerErrorFrom(error));
      render();
    }
  }

  const composer = buildComposer(elements.composerRoot, { submit });

  function render(): void {
    const phase = state.status?.phase ?? 'idle';
    elements.phaseChip.textContent = phase;
    elements.phaseChip.className = `chip ${phase}`;
    updateComposer(composer, state);
    renderTrace(elements.traceRoot, state.trace);
    renderMapView(elements.mapRoot, state.map, state.visibleLayers, state.status?.error ?? null, {
      onToggleLayer(name: string) {
        state = toggleLayer(state, name);
        render();
      },
    });
  }

  render();
  return { submit, refresh, render, state: () => state, composer, poller };
}
