#!/usr/bin/env python3
"""Watch the actor-critic loop catch and fix a broken plan.

A scripted actor first proposes a plan with an unknown tool and a bad
parameter; the deterministic rule critic rejects it with pointed blocking
issues; the actor's second (valid) proposal is approved and executed.

    python3 demos/refinement_loop.py
"""

import json
from pathlib import Path

from tilesmith import default_registry, execute, refine
from tilesmith.agents import RuleBasedCritic, ScriptedActor

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures" / "trajectories"

broken = json.loads((FIXTURES / "invalid_unknown_tool.json").read_text("utf-8"))
golden = json.loads((FIXTURES / "mountain_island.json").read_text("utf-8"))

registry = default_registry()
actor = ScriptedActor([broken, golden])
critic = RuleBasedCritic(registry)

trace = refine(
    "Create a mountain island with three height tiers.",
    registry,
    actor,
    critic,
    max_iterations=3,
)

print(f"outcome: {trace.outcome} after {trace.actor_calls()} proposals\n")
for record in trace.iterations:
    print(f"--- revision {record.revision} ---")
    print(f"summary: {record.trajectory.trajectory_summary[:70]}...")
    if record.critique is None:
        print("critique: (final revision, returned unreviewed)")
        continue
    print(f"critique: {record.critique.decision}")
    for issue in record.critique.blocking_issues:
        where = f"step {issue.step_index}" if issue.step_index is not None else "plan"
        print(f"  [{issue.dimension}] {where}: {issue.description}")
    print()

report = execute(trace.final_trajectory, registry, master_seed=42)
artifact = report.artifact
print(f"executed: {len(artifact.layers)} layers, {len(artifact.placements)} placements")
print(artifact.layers_by_height()[-1].grid.to_ascii())
