"""Layered map artifact: named grids stacked by height plus scattered objects.

The artifact is the engine's final output.  Its canonical JSON form (sorted
keys, compact separators, layers ordered by height index) round-trips
bit-identically, which the whole persistence and fixture story relies on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .grid import TileGrid

ARTIFACT_FORMAT = "map-artifact/1"

# Well-known surface materials; any other non-empty string is a custom material.
KNOWN_MATERIALS = ("terrain", "water", "grass", "sand", "path", "wall")


class ArtifactError(ValueError):
    """Raised when layer/placement invariants are violated."""


@dataclass(frozen=True)
class Layer:
    name: str
    height_index: int
    grid: TileGrid
    material: str = "terrain"

    def __post_init__(self):
        if not self.name:
            raise ArtifactError("layer name must be non-empty")
        if self.height_index < 0:
            raise ArtifactError(f"layer {self.name!r}: height_index must be >= 0")
        if not self.material:
            raise ArtifactError(f"layer {self.name!r}: material must be non-empty")


@dataclass(frozen=True)
class Placement:
    kind: str
    x: int
    y: int
    layer_name: str

    def __post_init__(self):
        if not self.kind:
            raise ArtifactError("placement kind must be non-empty")


@dataclass(frozen=True)
class MapArtifact:
    layers: tuple[Layer, ...]
    placements: tuple[Placement, ...] = ()
    seed: int = 0
    provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "placements", tuple(self.placements))
        names = [l.name for l in self.layers]
        if len(set(names)) != len(names):
            raise ArtifactError(f"duplicate layer names: {names}")
        indices = [l.height_index for l in self.layers]
        if len(set(indices)) != len(indices):
            raise ArtifactError(f"duplicate height indices: {indices}")
        dims = {(l.grid.width, l.grid.height) for l in self.layers}
        if len(dims) > 1:
            raise ArtifactError(f"layers disagree on grid dimensions: {sorted(dims)}")
        by_name = {l.name: l for l in self.layers}
        for p in self.placements:
            layer = by_name.get(p.layer_name)
            if layer is None:
                raise ArtifactError(
                    f"placement {p.kind!r} at ({p.x},{p.y}) references unknown layer {p.layer_name!r}"
                )
            if not (0 <= p.x < layer.grid.width and 0 <= p.y < layer.grid.height):
                raise ArtifactError(
                    f"placement {p.kind!r} at ({p.x},{p.y}) outside {layer.grid.width}x{layer.grid.height}"
                )

    def layer(self, name: str) -> Layer:
        for l in self.layers:
            if l.name == name:
                return l
        raise KeyError(name)

    def layers_by_height(self) -> list[Layer]:
        return sorted(self.layers, key=lambda l: l.height_index)

    def base_layer(self) -> Layer | None:
        ordered = self.layers_by_height()
        return ordered[0] if ordered else None

    def to_dict(self) -> dict:
        return {
            "format": ARTIFACT_FORMAT,
            "layers": [
                {
                    "name": l.name,
                    "height_index": l.height_index,
                    "material": l.material,
                    "grid": {
                        "width": l.grid.width,
                        "height": l.grid.height,
                        "rows": l.grid.to_rows(),
                    },
                }
                for l in self.layers_by_height()
            ],
            "placements": [
                {"kind": p.kind, "x": p.x, "y": p.y, "layer_name": p.layer_name}
                for p in self.placements
            ],
            "seed": self.seed,
            "provenance": self.provenance,
        }

    def to_json(self) -> str:
        """Canonical rendering: sorted keys, no whitespace."""
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, doc: dict) -> "MapArtifact":
        if doc.get("format") != ARTIFACT_FORMAT:
            raise ArtifactError(f"unsupported artifact format {doc.get('format')!r}")
        layers = tuple(
            Layer(
                name=ld["name"],
                height_index=ld["height_index"],
                material=ld["material"],
                grid=TileGrid.from_rows(ld["grid"]["rows"]),
            )
            for ld in doc["layers"]
        )
        placements = tuple(
            Placement(kind=pd["kind"], x=pd["x"], y=pd["y"], layer_name=pd["layer_name"])
            for pd in doc["placements"]
        )
        return cls(
            layers=layers,
            placements=placements,
            seed=doc["seed"],
            provenance=doc.get("provenance", ""),
        )

    @classmethod
    def from_json(cls, text: str) -> "MapArtifact":
        return cls.from_dict(json.loads(text))
