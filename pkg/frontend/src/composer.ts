import { ApiError } from './api.js';
import type { ViewState } from './state.js';
import { canCompose } from './state.js';

// The prompt composer: first submission creates a session, later ones send
// follow-up prompts. It disables itself while a round is in flight
// (mirroring the service's 409 rule) and renders validation errors inline.

export interface ComposerHandlers {
  submit(text: string): Promise<void>;
}

export interface ComposerElements {
  form: HTMLFormElement;
  input: HTMLTextAreaElement;
  button: HTMLButtonElement;
  error: HTMLElement;
}

export function buildComposer(root: HTMLElement, handlers: ComposerHandlers): ComposerElements {
  const doc = root.ownerDocument;
  const form = doc.createElement('form');
  form.className = 'composer';

  const input = doc.createElement('textarea');
  input.className = 'composer-input';
  input.placeholder = 'Describe the map you want…';
  form.appendChild(input);

  const button = doc.createElement('button');
  button.type = 'submit';
  button.className = 'composer-submit';
  button.textContent = 'send';
  form.appendChild(button);

  const error = doc.createElement('p');
  error.className = 'composer-error';
  error.hidden = true;
  form.appendChild(error);

  form.addEventListener('submit', (event) => {
    event.preventDefault();
    const text = input.value.trim();
    if (!text || button.disabled) return;
    void handlers.submit(text);
  });

  root.appendChild(form);
  return { form, input, button, error };
}

export function updateComposer(elements: ComposerElements, state: ViewState): void {
  const enabled = canCompose(state);
  elements.button.disabled = !enabled;
  elements.input.disabled = !enabled;
  elements.button.textContent = state.sessionId ? 'send follow-up' : 'send';
  if (state.composerError) {
    elements.error.hidden = false;
    elements.error.textContent = state.composerError;
  } else {
    elements.error.hidden = true;
    elements.error.textContent = '';
  }
}

export function composerErrorFrom(error: unknown): string {
  if (error instanceof ApiError) {
    if (error.fieldErrors.length > 0) {
      return error.fieldErrors.map((f) => `${f.field}: ${f.message}`).join('; ');
    }
    if (error.status === 409) {
      return 'a round is already in flight; wait for it to finish';
    }
    return error.message;
  }
  return error instanceof Error ? error.message : String(error);
}
