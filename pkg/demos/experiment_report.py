#!/usr/bin/env python3
"""Run the reliability experiment apparatus with scripted agents and print
the report table.

Ten trials of the four-constraint mountain task: once with the golden
plan (full success) and once with a two-land-mass variant, which still
succeeds but logs one mistake per run — the success-with-mistakes
category the classification exists to separate.

    python3 demos/experiment_report.py
"""

import json
from pathlib import Path

from tilesmith import default_registry
from tilesmith.agents import RuleBasedCritic, ScriptedActor
from tilesmith.evaluation import render_experiment_one_markdown, run_experiment_one

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures" / "trajectories"
registry = default_registry()


def scripted(plan_name):
    doc = json.loads((FIXTURES / f"{plan_name}.json").read_text("utf-8"))
    return lambda: ScriptedActor([doc])


for name in ("mountain_island", "two_landmass", "empty_base"):
    report = run_experiment_one(
        scripted(name),
        lambda: RuleBasedCritic(registry),
        max_iterations=1,
        trials=10,
        seed_base=1000,
        registry=registry,
    )
    print(f"\n## plan: {name}")
    print(render_experiment_one_markdown(report))
