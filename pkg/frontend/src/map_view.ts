import type { LayerDoc, MapDoc, PlacementDoc } from './types.js';

// Layer painting is split into a pure "compute the cells to fill" step and
// a thin canvas step, so the geometry is testable without a 2d context.

export const CELL_PIXELS = 8;

const MATERIAL_BASE: Record<string, [number, number, number]> = {
  terrain: [110, 84, 46],
  water: [38, 98, 170],
  grass: [58, 130, 52],
  sand: [204, 178, 110],
  path: [150, 140, 120],
  wall: [70, 70, 82],
};

const PLACEMENT_PALETTE = ['#e4572e', '#17bebb', '#ffc914', '#76b041', '#b14aed', '#2e86ab'];

export interface CellFill {
  x: number;
  y: number;
  color: string;
  layer: string;
}

export interface PlacementMark {
  x: number;
  y: number;
  kind: string;
  color: string;
  layer: string;
}

function shade(material: string, heightIndex: number): string {
  const base = MATERIAL_BASE[material] ?? [120, 120, 120];
  // Higher tiers render lighter: a cheap but readable pseudo-3D cue.
  const lift = Math.min(heightIndex * 28, 110);
  const [r, g, b] = base.map((channel) => Math.min(channel + lift, 255));
  return `rgb(${r}, ${g}, ${b})`;
}

export function computeLayerFills(
  map: MapDoc,
  visibleLayers: Record<string, boolean>,
): CellFill[] {
  const fills: CellFill[] = [];
  const ordered = [...map.layers].sort((a, b) => a.height_index - b.height_index);
  for (const layer of ordered) {
    if (visibleLayers[layer.name] === false) continue;
    const color = shade(layer.material, layer.height_index);
    layer.grid.rows.forEach((row, y) => {
      for (let x = 0; x < row.length; x += 1) {
        if (row[x] === '#') fills.push({ x, y, color, layer: layer.name });
      }
    });
  }
  return fills;
}

export function placementColor(kind: string, kinds: string[]): string {
  const index = Math.max(kinds.indexOf(kind), 0);
  return PLACEMENT_PALETTE[index % PLACEMENT_PALETTE.length];
}

export function computePlacementMarks(
  map: MapDoc,
  visibleLayers: Record<string, boolean>,
): PlacementMark[] {
  const kinds = [...new Set(map.placements.map((p) => p.kind))].sort();
  return map.placements
    .filter((p: PlacementDoc) => visibleLayers[p.layer_name] !== false)
    .map((p) => ({
      x: p.x,
      y: p.y,
      kind: p.kind,
      color: placementColor(p.kind, kinds),
      layer: p.layer_name,
    }));
}

export function mapDimensions(map: MapDoc): { width: number; height: number } {
  const first: LayerDoc | undefined = map.layers[0];
  return first ? { width: first.grid.width, height: first.grid.height } : { width: 0, height: 0 };
}

export interface MapViewHandlers {
  onToggleLayer(name: string): void;
}

export function renderMapView(
  container: HTMLElement,
  map: MapDoc | null,
  visibleLayers: Record<string, boolean>,
  failure: string | null,
  handlers: MapViewHandlers,
): void {
  const doc = container.ownerDocument;
  container.textContent = '';

  if (!map) {
    if (failure) {
      const notice = doc.createElement('div');
      notice.className = 'failure-notice';
      notice.appendChild(doc.createTextNode(`run failed: ${failure} — `));
      const link = doc.createElement('a');
      link.href = '#trace';
      link.textContent = 'see the trace';
      notice.appendChild(link);
      container.appendChild(notice);
    } else {
      const empty = doc.createElement('p');
      empty.className = 'empty';
      empty.textContent = 'no map yet';
      container.appendChild(empty);
    }
    return;
  }

  const meta = doc.createElement('p');
  meta.className = 'map-meta';
  meta.textContent = `seed ${map.seed} · provenance ${map.provenance.slice(0, 16)}…`;
  container.appendChild(meta);

  const toggles = doc.createElement('div');
  toggles.className = 'layer-toggles';
  for (const layer of [...map.layers].sort((a, b) => a.height_index - b.height_index)) {
    const label = doc.createElement('label');
    label.className = 'layer-toggle';
    const box = doc.createElement('input');
    box.type = 'checkbox';
    box.checked = visibleLayers[layer.name] !== false;
    box.dataset.layer = layer.name;
    box.addEventListener('change', () => handlers.onToggleLayer(layer.name));
    label.appendChild(box);
    label.appendChild(
      doc.createTextNode(` ${layer.name} (${layer.material}, height ${layer.height_index})`),
    );
    toggles.appendChild(label);
  }
  container.appendChild(toggles);

  const { width, height } = mapDimensions(map);
  const canvas = doc.createElement('canvas');
  canvas.className = 'map-canvas';
  canvas.width = width * CELL_PIXELS;
  canvas.height = height * CELL_PIXELS;
  container.appendChild(canvas);
  paint(canvas, map, visibleLayers);

  const legend = doc.createElement('p');
  legend.className = 'placement-legend';
  const kinds = [...new Set(map.placements.map((p) => p.kind))].sort();
  legend.textContent = kinds.length
    ? `placements: ${kinds.join(', ')} (${map.placements.length} total)`
    : 'no placements';
  container.appendChild(legend);
}

function paint(canvas: HTMLCanvasElement, map: MapDoc, visible: Record<string, boolean>): void {
  // happy-dom (tests) has no 2d context; geometry is tested through the
  // compute* functions instead.
  const ctx = typeof canvas.getContext === 'function' ? canvas.getContext('2d') : null;
  if (!ctx) return;
  ctx.fillStyle = '#10141a';
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  for (const fill of computeLayerFills(map, visible)) {
    ctx.fillStyle = fill.color;
    ctx.fillRect(fill.x * CELL_PIXELS, fill.y * CELL_PIXELS, CELL_PIXELS, CELL_PIXELS);
  }
  for (const mark of computePlacementMarks(map, visible)) {
    ctx.fillStyle = mark.color;
    ctx.beginPath();
    ctx.arc(
      mark.x * CELL_PIXELS + CELL_PIXELS / 2,
      mark.y * CELL_PIXELS + CELL_PIXELS / 2,
      CELL_PIXELS / 3,
      0,
      Math.PI * 2,
    );
    ctx.fill();
  }
}
