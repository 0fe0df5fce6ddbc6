import { StudioApi } from './api.js';
import { createApp } from './app.js';

createApp(
  {
    phaseChip: document.getElementById('phase-chip') as HTMLElement,
    composerRoot: document.getElementById('composer-root') as HTMLElement,
    traceRoot: document.getElementById('trace') as HTMLElement,
    mapRoot: document.getElementById('map') as HTMLElement,
  },
  new StudioApi(''),
);
