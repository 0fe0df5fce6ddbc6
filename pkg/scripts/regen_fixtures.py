#!/usr/bin/env python3
"""Regenerate the bundled plan/artifact fixtures.

Run from the repo root after changing the engine or the registry:

    python3 scripts/regen_fixtures.py

Fixtures are deterministic; the test suite re-derives and compares them,
so a diff after running this script means engine behavior changed.
"""

from __future__ import annotations

import json
from pathlib import Path

from tilesmith.evaluation import family_constraints, mountain_constraints
from tilesmith.execution import execute
from tilesmith.plans import parse_trajectory
from tilesmith.registry import default_registry

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"

GOLDEN_SEED = 42


def step(objective, tool_name, arguments, expected_result, binding=None):
    doc = {
        "objective": objective,
        "tool_name": tool_name,
        "arguments": arguments,
        "expected_result": expected_result,
    }
    if binding:
        doc["output_binding"] = binding
    return doc


MOUNTAIN_ISLAND = {
    "trajectory_summary": (
        "Grow a cave-automaton land mass, keep only the largest region so a "
        "single mountain remains, stack three shrinking height tiers, put "
        "grass on the top tier's mask and rocks on the water around the mountain."
    ),
    "tool_plan": [
        step("generate raw terrain blob", "gen_cellular_automata",
             {"width": 64, "height": 64, "fill_probability": 0.5, "iterations": 6,
              "birth_limit": 4, "death_limit": 3},
             "a large organic land mass with solid borders", "raw"),
        step("round off ragged edges", "mod_smooth", {"grid": "@raw", "iterations": 1},
             "same mass with single-cell noise removed", "smoothed"),
        step("guarantee one land mass", "mod_keep_largest_region",
             {"grid": "@smoothed", "connectivity": "eight"},
             "exactly one connected region", "island"),
        step("stack three height tiers", "build_height_layers",
             {"base": "@island", "tiers": 3, "shrink_radius": 2, "material": "terrain"},
             "tier_0..tier_2, each smaller than the last", "tiers"),
        step("compute the peak mask", "mod_morph", {"grid": "@island", "op": "erode", "radius": 4},
             "mask equal to tier_2 (erode 2 tiers x radius 2)", "peak"),
        step("grass only on the peak", "scatter",
             {"target": "@peak", "mode": "on_mask", "density": 0.25,
              "kind": "grass_spot", "layer_name": "tier_2"},
             "grass placements on peak cells only"),
        step("rocks outside the mountain", "scatter",
             {"target": "@island", "mode": "off_mask", "density": 0.05,
              "kind": "rock", "layer_name": "tier_0"},
             "rock placements on water cells only"),
    ],
    "risks": ["height tiers can erode to empty if the mass is too thin"],
    "revision": 0,
}

TWO_LANDMASS = {
    "trajectory_summary": (
        "Mountain variant that skips the largest-region filter, leaving two "
        "separate land masses; every seed below is pinned so the artifact is "
        "identical on every run."
    ),
    "tool_plan": [
        step("generate raw terrain blobs", "gen_cellular_automata",
             {"seed": 0, "width": 64, "height": 64, "fill_probability": 0.46,
              "iterations": 6, "birth_limit": 4, "death_limit": 3},
             "two or more organic land masses", "raw"),
        step("round off ragged edges", "mod_smooth", {"grid": "@raw", "iterations": 1},
             "smoother masses", "base"),
        step("stack three height tiers", "build_height_layers",
             {"base": "@base", "tiers": 3, "shrink_radius": 2, "material": "terrain"},
             "tier_0..tier_2", "tiers"),
        step("compute the peak mask", "mod_morph", {"grid": "@base", "op": "erode", "radius": 4},
             "mask equal to tier_2", "peak"),
        step("grass only on the peak", "scatter",
             {"seed": 101, "target": "@peak", "mode": "on_mask", "density": 0.25,
              "kind": "grass_spot", "layer_name": "tier_2"},
             "grass placements on peak cells only"),
        step("rocks outside the mountains", "scatter",
             {"seed": 202, "target": "@base", "mode": "off_mask", "density": 0.05,
              "kind": "rock", "layer_name": "tier_0"},
             "rock placements on water cells only"),
    ],
    "risks": ["intentionally violates the single-mass requirement"],
    "revision": 0,
}

EMPTY_BASE = {
    "trajectory_summary": (
        "Degenerate plan whose base never fills, leaving three empty tiers; "
        "used to exercise the failure classification."
    ),
    "tool_plan": [
        step("generate an empty base", "gen_cellular_automata",
             {"width": 64, "height": 64, "fill_probability": 0.0, "iterations": 0},
             "an empty grid", "base"),
        step("stack three height tiers", "build_height_layers",
             {"base": "@base", "tiers": 3, "shrink_radius": 2, "material": "terrain"},
             "three empty tiers", "tiers"),
        step("grass on the peak", "scatter",
             {"target": "@base", "mode": "on_mask", "density": 0.25,
              "kind": "grass_spot", "layer_name": "tier_2"},
             "no eligible cells, so no grass"),
        step("rocks outside", "scatter",
             {"seed": 7, "target": "@base", "mode": "off_mask", "density": 0.02,
              "kind": "rock", "layer_name": "tier_0"},
             "rocks everywhere (everything is off-mask)"),
    ],
    "risks": ["fill probability zero produces no terrain at all"],
    "revision": 0,
}

BEACH2D = {
    "trajectory_summary": (
        "Threshold low-frequency value noise into one connected band of sand "
        "and sprinkle shells on it."
    ),
    "tool_plan": [
        step("sand-shaped noise region", "gen_noise_region",
             {"width": 64, "height": 64, "frequency": 0.06, "octaves": 3, "threshold": 0.48},
             "broad noise blobs", "noise"),
        step("keep one beach", "mod_keep_largest_region", {"grid": "@noise", "connectivity": "eight"},
             "a single connected sand region", "sand"),
        step("wrap the sand as a flat layer", "build_height_layers",
             {"base": "@sand", "tiers": 1, "shrink_radius": 1, "material": "sand"},
             "one sand layer named tier_0", "layers"),
        step("shells on the sand", "scatter",
             {"target": "@sand", "mode": "on_mask", "density": 0.04,
              "kind": "shell", "layer_name": "tier_0"},
             "sparse shells on sand cells"),
    ],
    "risks": [],
    "revision": 0,
}

GOLF_COURSE = {
    "trajectory_summary": (
        "Two stacked grass tiers from a soft noise fairway, with trees "
        "scattered outside it."
    ),
    "tool_plan": [
        step("fairway-shaped noise region", "gen_noise_region",
             {"width": 64, "height": 64, "frequency": 0.05, "octaves": 2, "threshold": 0.42},
             "large soft region", "noise"),
        step("keep one fairway", "mod_keep_largest_region", {"grid": "@noise", "connectivity": "eight"},
             "a single connected fairway", "fairway"),
        step("two grass tiers", "build_height_layers",
             {"base": "@fairway", "tiers": 2, "shrink_radius": 3, "material": "grass"},
             "tier_0 and a smaller tier_1", "layers"),
        step("trees around the course", "scatter",
             {"target": "@fairway", "mode": "off_mask", "density": 0.06,
              "kind": "tree", "layer_name": "tier_0"},
             "trees on cells outside the fairway"),
    ],
    "risks": ["tier_1 can erode to empty if the fairway is narrow"],
    "revision": 0,
}

MAZE2D = {
    "trajectory_summary": "A perfect maze wrapped as a single wall layer.",
    "tool_plan": [
        step("carve the maze", "gen_maze", {"width": 41, "height": 41},
             "perfect maze: walls alive, corridors dead", "maze"),
        step("wrap as wall layer", "build_height_layers",
             {"base": "@maze", "tiers": 1, "shrink_radius": 1, "material": "wall"},
             "one wall layer named tier_0", "layers"),
    ],
    "risks": [],
    "revision": 0,
}

INVALID_UNKNOWN_TOOL = {
    "trajectory_summary": "Plan that names a tool the engine does not have.",
    "tool_plan": [
        step("generate mountains", "gen_mountains", {"width": 64, "height": 64},
             "will never run", "base"),
        step("stack tiers", "build_height_layers",
             {"base": "@base", "tiers": 3, "shrink_radius": 2},
             "unreachable"),
    ],
    "risks": [],
    "revision": 0,
}


def main() -> None:
    registry = default_registry()
    trajectories = {
        "mountain_island": MOUNTAIN_ISLAND,
        "two_landmass": TWO_LANDMASS,
        "empty_base": EMPTY_BASE,
        "beach2d": BEACH2D,
        "golf_course": GOLF_COURSE,
        "maze2d": MAZE2D,
        "invalid_unknown_tool": INVALID_UNKNOWN_TOOL,
    }
    tdir = FIXTURES / "trajectories"
    tdir.mkdir(parents=True, exist_ok=True)
    for name, doc in trajectories.items():
        (tdir / f"{name}.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
        print(f"wrote trajectories/{name}.json")

    adir = FIXTURES / "artifacts"
    adir.mkdir(parents=True, exist_ok=True)
    golden = parse_trajectory(json.dumps(MOUNTAIN_ISLAND))
    report = execute(golden, registry, master_seed=GOLDEN_SEED)
    assert report.artifact is not None, report.to_dict()
    results = mountain_constraints(report.artifact)
    assert all(c.satisfied for c in results), [c.to_dict() for c in results]
    (adir / "mountain_island_seed42.json").write_text(
        report.artifact.to_json() + "\n", encoding="utf-8"
    )
    print("wrote artifacts/mountain_island_seed42.json "
          f"({len(report.artifact.layers)} layers, {len(report.artifact.placements)} placements)")

    for name, family in [("beach2d", "beach2d"), ("golf_course", "golf_course"), ("maze2d", "maze2d")]:
        plan = parse_trajectory(json.dumps(trajectories[name]))
        rep = execute(plan, registry, master_seed=GOLDEN_SEED)
        assert rep.artifact is not None, (name, rep.to_dict())
        res = family_constraints(rep.artifact, family)
        assert all(c.satisfied for c in res), (name, [c.to_dict() for c in res])
        print(f"verified {name} against its family constraints")


if __name__ == "__main__":
    main()
