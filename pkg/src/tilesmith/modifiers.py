"""Grid modifiers and composers: smoothing, morphology, region filtering,
height tiers, and object scattering."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .artifact import Layer, Placement
from .generators import ParameterRangeError, _require
from .grid import TileGrid
from .rng import SplitMix64

FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


def _connectivity_structure(connectivity: str) -> np.ndarray:
    if connectivity == "four":
        return FOUR_CONNECTED
    if connectivity == "eight":
        return EIGHT_CONNECTED
    raise ParameterRangeError(f"connectivity must be 'four' or 'eight', got {connectivity!r}")


def mod_smooth(grid: TileGrid, iterations: int) -> TileGrid:
    """Majority filter over the 8-neighborhood.

    A cell flips to the majority state of its neighbors; exact 4-4 ties keep
    the current state.  Neighbors beyond the border count as the cell's own
    state, so smoothing is neutral at the edges.
    """
    _require(iterations >= 0, f"iterations {iterations} must be >= 0")
    cells = grid.cells
    for _ in range(iterations):
        cells = _smooth_step(cells)
    return TileGrid(cells)


def _smooth_step(cells: np.ndarray) -> np.ndarray:
    padded = np.pad(cells, 1, constant_values=False).astype(np.int32)
    alive = (
        padded[:-2, :-2] + padded[:-2, 1:-1] + padded[:-2, 2:]
        + padded[1:-1, :-2] + padded[1:-1, 2:]
        + padded[2:, :-2] + padded[2:, 1:-1] + padded[2:, 2:]
    )
    ones = np.pad(np.ones_like(cells, dtype=np.int32), 1, constant_values=0)
    in_bounds = (
        ones[:-2, :-2] + ones[:-2, 1:-1] + ones[:-2, 2:]
        + ones[1:-1, :-2] + ones[1:-1, 2:]
        + ones[2:, :-2] + ones[2:, 1:-1] + ones[2:, 2:]
    )
    # Out-of-bounds neighbors contribute the cell's own state.
    alive = alive + (8 - in_bounds) * cells
    return np.where(alive > 4, True, np.where(alive < 4, False, cells))


def mod_morph(grid: TileGrid, op: str, radius: int) -> TileGrid:
    """Binary erosion/dilation with a Chebyshev (square) structuring element.

    Cells beyond the border are dead for both operations: erosion eats the
    outer `radius` ring, dilation never grows past what in-bounds cells
    support.
    """
    _require(radius >= 1, f"radius {radius} must be >= 1")
    size = 2 * radius + 1
    structure = np.ones((size, size), dtype=bool)
    if op == "erode":
        out = ndimage.binary_erosion(grid.cells, structure=structure, border_value=0)
    elif op == "dilate":
        out = ndimage.binary_dilation(grid.cells, structure=structure, border_value=0)
    else:
        raise ParameterRangeError(f"op must be 'erode' or 'dilate', got {op!r}")
    return TileGrid(out)


def mod_keep_largest_region(grid: TileGrid, connectivity: str = "eight") -> TileGrid:
    """Keep only the largest connected component of alive cells.

    Ties go to the component whose first cell comes earliest in row-major
    order (labels are assigned in scan order, and argmax picks the first
    maximum).  An empty grid passes through unchanged.
    """
    structure = _connectivity_structure(connectivity)
    labels, count = ndimage.label(grid.cells, structure=structure)
    if count == 0:
        return grid
    sizes = np.bincount(labels.ravel())[1:]
    keep = int(np.argmax(sizes)) + 1
    return TileGrid(labels == keep)


def count_regions(grid: TileGrid, connectivity: str = "eight") -> int:
    """Number of connected components of alive cells."""
    structure = _connectivity_structure(connectivity)
    _, count = ndimage.label(grid.cells, structure=structure)
    return int(count)


def build_height_layers(
    base: TileGrid, tiers: int, shrink_radius: int, material: str = "terrain"
) -> list[Layer]:
    """Stacked height tiers: tier k is the base eroded by k * shrink_radius.

    Tiers that erode away entirely are still emitted as empty layers; the
    tier count is a plan-level promise and the evaluation side decides
    whether an empty tier is acceptable.
    """
    _require(tiers >= 1, f"tiers {tiers} must be >= 1")
    _require(shrink_radius >= 1, f"shrink_radius {shrink_radius} must be >= 1")
    layers = []
    current = base
    for k in range(tiers):
        if k > 0:
            current = mod_morph(current, "erode", shrink_radius)
        layers.append(Layer(name=f"tier_{k}", height_index=k, grid=current, material=material))
    return layers


def scatter(
    target: TileGrid,
    mode: str,
    density: float,
    seed: int,
    kind: str,
    layer_name: str,
) -> list[Placement]:
    """Independent Bernoulli scatter over eligible cells.

    Eligible cells are the alive cells (`on_mask`) or dead cells
    (`off_mask`) of the target.  Walking eligible cells in row-major order,
    each draws one stream float and is selected when the draw is below
    `density`; density 1.0 therefore selects every eligible cell.
    """
    if mode not in ("on_mask", "off_mask"):
        raise ParameterRangeError(f"mode must be 'on_mask' or 'off_mask', got {mode!r}")
    _require(0.0 < density <= 1.0, f"density {density} not in (0,1]")
    if not kind:
        raise ParameterRangeError("kind must be non-empty")
    if not layer_name:
        raise ParameterRangeError("layer_name must be non-empty")

    eligible = target.cells if mode == "on_mask" else ~target.cells
    rng = SplitMix64(seed)
    placements = []
    ys, xs = np.nonzero(eligible)
    for y, x in zip(ys.tolist(), xs.tolist()):
        if rng.next_float() < density:
            placements.append(Placement(kind=kind, x=x, y=y, layer_name=layer_name))
    return placements
