"""Dense boolean occupancy grid, the unit all generators and modifiers act on."""

from __future__ import annotations

import numpy as np

MAX_DIMENSION = 4096


class GridDimensionError(ValueError):
    """Width or height outside the engine cap [1, 4096]."""


class TileGrid:
    """Immutable-by-convention 2D occupancy grid.

    Cells are stored row-major as a (height, width) boolean array; True is
    an occupied ("alive") cell.  Do not mutate `cells` after construction:
    grids are shared freely between threads and cached by the executor.
    """

    __slots__ = ("width", "height", "cells")

    def __init__(self, cells: np.ndarray):
        arr = np.asarray(cells, dtype=bool)
        if arr.ndim != 2:
            raise GridDimensionError(f"expected a 2D cell array, got shape {arr.shape}")
        h, w = arr.shape
        check_dimensions(w, h)
        self.width = w
        self.height = h
        self.cells = arr
        arr.setflags(write=False)

    @classmethod
    def empty(cls, width: int, height: int) -> "TileGrid":
        check_dimensions(width, height)
        return cls(np.zeros((height, width), dtype=bool))

    @classmethod
    def full(cls, width: int, height: int) -> "TileGrid":
        check_dimensions(width, height)
        return cls(np.ones((height, width), dtype=bool))

    @classmethod
    def from_rows(cls, rows: list[str]) -> "TileGrid":
        """Parse the ASCII form: '#' alive, '.' dead, one string per row."""
        if not rows:
            raise GridDimensionError("no rows")
        width = len(rows[0])
        cells = np.zeros((len(rows), width), dtype=bool)
        for y, row in enumerate(rows):
            if len(row) != width:
                raise GridDimensionError(f"row {y} has length {len(row)}, expected {width}")
            for x, ch in enumerate(row):
                if ch == "#":
                    cells[y, x] = True
                elif ch != ".":
                    raise ValueError(f"bad cell character {ch!r} at row {y}")
        return cls(cells)

    def to_rows(self) -> list[str]:
        return ["".join("#" if c else "." for c in row) for row in self.cells]

    def to_ascii(self) -> str:
        return "\n".join(self.to_rows())

    def to_pgm(self) -> str:
        """Plain (P2) PGM; alive=255, dead=0."""
        lines = [f"P2", f"{self.width} {self.height}", "255"]
        for row in self.cells:
            lines.append(" ".join("255" if c else "0" for c in row))
        return "\n".join(lines) + "\n"

    def alive_count(self) -> int:
        return int(self.cells.sum())

    def is_empty(self) -> bool:
        return not bool(self.cells.any())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TileGrid):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and bool(np.array_equal(self.cells, other.cells))
        )

    def __hash__(self):
        return hash((self.width, self.height, self.cells.tobytes()))

    def __repr__(self):
        return f"TileGrid({self.width}x{self.height}, alive={self.alive_count()})"


def check_dimensions(width: int, height: int) -> None:
    if not (1 <= width <= MAX_DIMENSION) or not (1 <= height <= MAX_DIMENSION):
        raise GridDimensionError(
            f"grid dimensions {width}x{height} outside [1, {MAX_DIMENSION}]"
        )
