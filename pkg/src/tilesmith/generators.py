"""Grid generators: cellular automata, fractal value noise, and perfect mazes.

Every generator is a pure function of its arguments.  Randomness comes only
from the splitmix64 stream in `rng`, consumed in a documented order, so a
given seed reproduces the same grid on any platform.
"""

from __future__ import annotations

import numpy as np

from .grid import TileGrid, check_dimensions
from .rng import MASK64, GAMMA, SPLIT_SALT, SplitMix64, float_stream


class ParameterRangeError(ValueError):
    """A generator/modifier argument fell outside its documented range."""


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ParameterRangeError(message)


def gen_cellular_automata(
    seed: int,
    width: int,
    height: int,
    fill_probability: float,
    iterations: int,
    birth_limit: int = 4,
    death_limit: int = 3,
) -> TileGrid:
    """Cave-style blob generator.

    The initial grid fills each cell alive with `fill_probability`, drawing
    one stream float per cell in row-major order.  Each iteration then runs
    a synchronous birth/death rule over the 8-neighborhood: dead cells come
    alive when the alive-neighbor count exceeds `birth_limit`, alive cells
    survive when it is at least `death_limit`.  Cells beyond the border
    count as alive, which keeps map edges solid.
    """
    check_dimensions(width, height)
    _require(0.0 <= fill_probability <= 1.0, f"fill_probability {fill_probability} not in [0,1]")
    _require(iterations >= 0, f"iterations {iterations} must be >= 0")
    _require(0 <= birth_limit <= 8, f"birth_limit {birth_limit} not in [0,8]")
    _require(0 <= death_limit <= 8, f"death_limit {death_limit} not in [0,8]")

    floats = float_stream(seed, width * height).reshape(height, width)
    cells = floats < fill_probability
    for _ in range(iterations):
        cells = _ca_step(cells, birth_limit, death_limit)
    return TileGrid(cells)


def _ca_step(cells: np.ndarray, birth_limit: int, death_limit: int) -> np.ndarray:
    padded = np.pad(cells, 1, constant_values=True).astype(np.int32)
    counts = (
        padded[:-2, :-2] + padded[:-2, 1:-1] + padded[:-2, 2:]
        + padded[1:-1, :-2] + padded[1:-1, 2:]
        + padded[2:, :-2] + padded[2:, 1:-1] + padded[2:, 2:]
    )
    born = ~cells & (counts > birth_limit)
    survives = cells & (counts >= death_limit)
    return born | survives


def gen_noise_region(
    seed: int,
    width: int,
    height: int,
    frequency: float,
    octaves: int,
    threshold: float,
) -> TileGrid:
    """Threshold of normalized fractal value noise.

    Octave o samples the lattice at frequency * 2**o with amplitude 0.5**o
    (persistence 0.5).  Lattice values come from hash_cell-style mixing of
    (seed, octave, ix, iy) mapped to [0,1); samples interpolate bilinearly
    between the four surrounding lattice points.  The octave sum is divided
    by the total amplitude so values land in [0,1); a cell is alive when
    its value is >= threshold.
    """
    check_dimensions(width, height)
    _require(frequency > 0.0, f"frequency {frequency} must be > 0")
    _require(1 <= octaves <= 8, f"octaves {octaves} not in [1,8]")
    _require(0.0 <= threshold <= 1.0, f"threshold {threshold} not in [0,1]")

    ys, xs = np.mgrid[0:height, 0:width]
    total = np.zeros((height, width), dtype=np.float64)
    amplitude_sum = 0.0
    for octave in range(octaves):
        freq = frequency * (2.0 ** octave)
        amp = 0.5 ** octave
        px = xs * freq
        py = ys * freq
        x0 = np.floor(px).astype(np.int64)
        y0 = np.floor(py).astype(np.int64)
        fx = px - x0
        fy = py - y0
        v00 = _lattice(seed, octave, x0, y0)
        v10 = _lattice(seed, octave, x0 + 1, y0)
        v01 = _lattice(seed, octave, x0, y0 + 1)
        v11 = _lattice(seed, octave, x0 + 1, y0 + 1)
        top = v00 + (v10 - v00) * fx
        bottom = v01 + (v11 - v01) * fx
        total += amp * (top + (bottom - top) * fy)
        amplitude_sum += amp
    values = total / amplitude_sum
    return TileGrid(values >= threshold)


def _lattice(seed: int, octave: int, ix: np.ndarray, iy: np.ndarray) -> np.ndarray:
    """Vectorized lattice-point hash; matches rng.hash_cell bit for bit."""
    h = _vmix(np.uint64(seed & MASK64) ^ (ix.astype(np.uint64) * np.uint64(GAMMA)))
    h = _vmix(h ^ (iy.astype(np.uint64) * np.uint64(SPLIT_SALT)))
    h = _vmix(h ^ np.uint64(octave))
    return (h >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)


def _vmix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def gen_maze(seed: int, width: int, height: int) -> TileGrid:
    """Recursive-backtracker perfect maze.

    Alive cells are walls; corridor nodes sit at odd (x, y) coordinates and
    carving removes the wall between a node and the chosen neighbor.  The
    corridor graph of the result is a spanning tree.  Neighbor candidates
    are considered in N, E, S, W order and picked with next_below, so the
    layout is fully determined by the seed.
    """
    check_dimensions(width, height)
    if width % 2 == 0 or height % 2 == 0 or width < 3 or height < 3:
        raise ParameterRangeError(f"maze dimensions must be odd and >= 3, got {width}x{height}")

    rng = SplitMix64(seed)
    cells = np.ones((height, width), dtype=bool)
    start = (1, 1)
    cells[start[1], start[0]] = False
    stack = [start]
    visited = {start}
    while stack:
        x, y = stack[-1]
        candidates = []
        for dx, dy in ((0, -2), (2, 0), (0, 2), (-2, 0)):
            nx, ny = x + dx, y + dy
            if 0 < nx < width and 0 < ny < height and (nx, ny) not in visited:
                candidates.append((nx, ny))
        if not candidates:
            stack.pop()
            continue
        nx, ny = candidates[rng.next_below(len(candidates))]
        cells[(y + ny) // 2, (x + nx) // 2] = False
        cells[ny, nx] = False
        visited.add((nx, ny))
        stack.append((nx, ny))
    return TileGrid(cells)
