"""tilesmith: dual-agent planning over a deterministic tile-map engine.

A natural-language map description goes to an actor agent that proposes a
tool plan, a critic agent that statically verifies it against the tool
registry, and a bounded refinement loop between the two; the approved (or
best-effort) plan then executes against the procedural engine into a
layered map artifact.
"""

from .artifact import ArtifactError, Layer, MapArtifact, Placement
from .generators import ParameterRangeError, gen_cellular_automata, gen_maze, gen_noise_region
from .grid import GridDimensionError, TileGrid
from .modifiers import (
    build_height_layers,
    mod_keep_largest_region,
    mod_morph,
    mod_smooth,
    scatter,
)
from .plans import Critique, Trajectory, parse_critique, parse_trajectory
from .refinement import RefinementTrace, refine
from .registry import Registry, default_registry, load_registry
from .execution import ExecutionReport, execute

__version__ = "0.1.0"

__all__ = [
    "ArtifactError",
    "Critique",
    "ExecutionReport",
    "GridDimensionError",
    "Layer",
    "MapArtifact",
    "ParameterRangeError",
    "Placement",
    "RefinementTrace",
    "Registry",
    "TileGrid",
    "Trajectory",
    "build_height_layers",
    "default_registry",
    "execute",
    "gen_cellular_automata",
    "gen_maze",
    "gen_noise_region",
    "load_registry",
    "mod_keep_largest_region",
    "mod_morph",
    "mod_smooth",
    "parse_critique",
    "parse_trajectory",
    "refine",
    "scatter",
    "__version__",
]
