"""Acceptance suite: one test per exit criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines and timings.  Every tolerance here is exact (bit/count equality);
the stated time budgets are asserted too.
"""

import json
import random
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from tilesmith.agents import (
    CRITIQUE_HEADER,
    RuleBasedCritic,
    ScriptedActor,
    TRAJECTORY_HEADER,
    TokenUsage,
)
from tilesmith.evaluation import run_experiment_one, run_experiment_two
from tilesmith.execution import execute
from tilesmith.generators import gen_cellular_automata, gen_maze, gen_noise_region
from tilesmith.grid import TileGrid
from tilesmith.modifiers import (
    build_height_layers,
    count_regions,
    mod_keep_largest_region,
    mod_morph,
    mod_smooth,
    scatter,
)
from tilesmith.plans import (
    DataflowViolation,
    SchemaViolation,
    parse_critique,
    parse_trajectory,
    render_critique,
    render_trajectory,
)
from tilesmith.refinement import refine
from tilesmith.service import SessionStore, create_app

from .conftest import FIXTURES, load_fixture_plan
from .oracles import (
    ca_step_reference,
    corridor_graph,
    flood_fill_components,
    initial_fill_reference,
)
from .plangen import CHECKABLE_DIMENSIONS, inject_fault, random_valid_plan
from .test_plans import random_critique_doc, random_trajectory_doc


class Budget:
    def __init__(self, name: str, seconds: float):
        self.name = name
        self.seconds = seconds

    def __enter__(self):
        self.started = time.monotonic()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.monotonic() - self.started
        if exc_type is None:
            print(f"[PASS] {self.name} ({elapsed:.2f}s < {self.seconds:.0f}s budget)")
            assert elapsed < self.seconds, f"{self.name} exceeded budget: {elapsed:.2f}s"
        else:
            print(f"[FAIL] {self.name} ({elapsed:.2f}s)")
        return False


def test_refinement_control_flow_fidelity(registry, golden_plan):
    with Budget("Refinement control flow: call-count law, K=0, unverified final revision", 1.0):
        invalid = load_fixture_plan("invalid_unknown_tool")

        # Approval at iteration j costs j+1 actor and j+1 critic calls.
        for j in (0, 1, 3):
            actor = ScriptedActor([invalid] * j + [golden_plan])
            trace = refine("p", registry, actor, RuleBasedCritic(registry), 10)
            assert trace.outcome == "approved"
            assert trace.actor_calls() == j + 1
            assert trace.critic_calls() == j + 1

        # Best effort with cap K costs K+1 actor and K critic calls.
        for k in (1, 2, 5):
            actor = ScriptedActor([invalid] * (k + 1))
            trace = refine("p", registry, actor, RuleBasedCritic(registry), k)
            assert trace.outcome == "best_effort"
            assert trace.actor_calls() == k + 1
            assert trace.critic_calls() == k

        # K=0 returns the initial proposal unreviewed.
        trace = refine("p", registry, ScriptedActor([golden_plan]), RuleBasedCritic(registry), 0)
        assert trace.outcome == "best_effort"
        assert trace.critic_calls() == 0

        # The final revision is returned without a critic pass even when
        # it would have been approved.
        actor = ScriptedActor([invalid, golden_plan])
        trace = refine("p", registry, actor, RuleBasedCritic(registry), 1)
        assert trace.outcome == "best_effort"
        assert trace.final_trajectory.revision == 1
        assert trace.iterations[-1].critique is None
        assert trace.final_validation == []


def test_context_replacement(registry):
    with Budget("Context replacement: one trajectory + one critique block at K=10", 5.0):
        invalid = load_fixture_plan("invalid_unknown_tool")
        k = 10
        actor = ScriptedActor([invalid] * (k + 1))
        trace = refine("prompt", registry, actor, RuleBasedCritic(registry), k)
        assert trace.actor_calls() == k + 1
        for iteration in trace.iterations:
            expected = 0 if iteration.revision == 0 else 1
            assert iteration.actor_prompt.count(TRAJECTORY_HEADER) == expected
            assert iteration.actor_prompt.count(CRITIQUE_HEADER) == expected
        revision_lengths = [len(it.actor_prompt) for it in trace.iterations[1:]]
        assert max(revision_lengths) == min(revision_lengths)


def test_critic_soundness(registry):
    with Budget("Critic soundness: 500 generated plans, approval implies clean execution", 30.0):
        rng = random.Random(20240901)
        critic = RuleBasedCritic(registry)
        valid_count = faulted_count = 0
        for case in range(500):
            if case % 2 == 0:
                plan = random_valid_plan(rng)
                critique, usage = critic.review(plan, "d", "e", "p")
                assert usage.total_tokens == 0
                assert critique.decision == "approve", [
                    (i.dimension, i.description) for i in critique.blocking_issues
                ]
                report = execute(plan, registry, master_seed=rng.randrange(2**32))
                assert report.failed_step is None, report.to_dict()
                valid_count += 1
            else:
                dimension = CHECKABLE_DIMENSIONS[(case // 2) % len(CHECKABLE_DIMENSIONS)]
                plan = inject_fault(rng, random_valid_plan(rng), dimension)
                critique, _ = critic.review(plan, "d", "e", "p")
                assert critique.decision == "revise"
                assert any(i.dimension == dimension for i in critique.blocking_issues), (
                    dimension,
                    [(i.dimension, i.description) for i in critique.blocking_issues],
                )
                faulted_count += 1
        assert valid_count + faulted_count == 500


def test_engine_oracles():
    with Budget("Engine oracles: CA step, connectivity, maze tree, determinism", 60.0):
        rng = random.Random(7)

        # Cellular automata vs iterated naive reference, 200 cases.
        for _ in range(200):
            w, h = rng.randrange(1, 33), rng.randrange(1, 33)
            seed = rng.randrange(2**32)
            fill = rng.uniform(0.2, 0.8)
            iterations = rng.randrange(0, 4)
            birth, death = rng.randrange(0, 9), rng.randrange(0, 9)
            grid = gen_cellular_automata(seed, w, h, fill, iterations, birth, death)
            cells = initial_fill_reference(seed, w, h, fill)
            for _ in range(iterations):
                cells = ca_step_reference(cells, birth, death)
            assert np.array_equal(grid.cells, cells)

        # Connectivity counting vs flood-fill oracle, 200 cases, both modes.
        for _ in range(200):
            w, h = rng.randrange(1, 33), rng.randrange(1, 33)
            cells = np.array(
                [[rng.random() < 0.5 for _ in range(w)] for _ in range(h)], dtype=bool
            )
            grid = TileGrid(cells)
            for connectivity in ("four", "eight"):
                assert count_regions(grid, connectivity) == len(
                    flood_fill_components(cells, connectivity)
                )

        # Maze corridors form a spanning tree, 50 seeds.
        for seed in range(50):
            maze = gen_maze(seed, 21, 21)
            nodes, edges, components = corridor_graph(maze.cells)
            assert components == 1
            assert edges == nodes - 1

        # Byte determinism of every engine operation across two runs.
        base = gen_cellular_automata(9, 24, 24, 0.5, 3)
        pairs = [
            (gen_cellular_automata(3, 16, 16, 0.45, 5, 4, 3),
             gen_cellular_automata(3, 16, 16, 0.45, 5, 4, 3)),
            (gen_noise_region(5, 24, 24, 0.1, 3, 0.5), gen_noise_region(5, 24, 24, 0.1, 3, 0.5)),
            (gen_maze(11, 15, 15), gen_maze(11, 15, 15)),
            (mod_smooth(base, 2), mod_smooth(base, 2)),
            (mod_morph(base, "erode", 2), mod_morph(base, "erode", 2)),
            (mod_keep_largest_region(base, "eight"), mod_keep_largest_region(base, "eight")),
        ]
        for a, b in pairs:
            assert a.cells.tobytes() == b.cells.tobytes()
        layers_a = build_height_layers(base, 3, 1)
        layers_b = build_height_layers(base, 3, 1)
        assert [l.grid.cells.tobytes() for l in layers_a] == [
            l.grid.cells.tobytes() for l in layers_b
        ]
        assert scatter(base, "on_mask", 0.3, 4, "rock", "tier_0") == scatter(
            base, "on_mask", 0.3, 4, "rock", "tier_0"
        )


def test_experiment_one_apparatus(registry, golden_plan, two_landmass_plan):
    with Budget("Experiment I apparatus: golden 100%/0, two-landmass 100%/1 mistake", 30.0):
        golden_report = run_experiment_one(
            lambda: ScriptedActor([golden_plan]),
            lambda: RuleBasedCritic(registry),
            max_iterations=1,
            trials=10,
            seed_base=500,
            registry=registry,
        )
        assert golden_report["trials"] == 10
        assert golden_report["success_rate"] == 1.0
        assert golden_report["avg_mistakes_per_successful_run"] == 0.0

        variant_report = run_experiment_one(
            lambda: ScriptedActor([two_landmass_plan]),
            lambda: RuleBasedCritic(registry),
            max_iterations=1,
            trials=10,
            seed_base=500,
            registry=registry,
        )
        assert variant_report["success_rate"] == 1.0
        assert variant_report["avg_mistakes_per_successful_run"] == 1.0
        assert variant_report["mistake_reasons"] == {"single_landmass": 10}


def test_experiment_two_apparatus(registry, golden_plan, empty_base_plan):
    with Budget("Experiment II apparatus: prompts-required and exact token sums", 30.0):
        actor_usages = [
            TokenUsage(1200, 150, "actor"),
            TokenUsage(900, 120, "actor"),
            TokenUsage(800, 100, "actor"),
        ]
        critic_usages = [TokenUsage(500, 40, "critic")] * 3

        class AccountingCritic:
            """Rule critic that reports the scenario's declared usage."""

            def __init__(self):
                self.inner = RuleBasedCritic(registry)
                self.calls = 0

            def review(self, *args, **kwargs):
                critique, _ = self.inner.review(*args, **kwargs)
                usage = critic_usages[self.calls]
                self.calls += 1
                return critique, usage

        result = run_experiment_two(
            "actor_critic",
            "mountain_island",
            followups=["the map is empty", "still empty, fill the terrain"],
            actor=lambda: ScriptedActor(
                [empty_base_plan, empty_base_plan, golden_plan], usages=actor_usages
            ),
            critic=AccountingCritic,
            max_iterations=1,
            registry=registry,
            seed=0,
        )
        assert result.prompts_required == 3
        assert result.achieved is True
        expected_prompt = sum(u.prompt_tokens for u in actor_usages) + sum(
            u.prompt_tokens for u in critic_usages
        )
        expected_completion = sum(u.completion_tokens for u in actor_usages) + sum(
            u.completion_tokens for u in critic_usages
        )
        assert result.record.token_usage.prompt_tokens == expected_prompt
        assert result.record.token_usage.completion_tokens == expected_completion
        assert result.record.followup_prompts == 2


def test_schema_round_trips():
    with Budget("Schema round-trips: 1000 generated documents + invalid fixtures", 30.0):
        rng = random.Random(31337)
        for _ in range(500):
            doc = random_trajectory_doc(rng)
            t = parse_trajectory(json.dumps(doc))
            assert parse_trajectory(render_trajectory(t)) == t
        for _ in range(500):
            doc = random_critique_doc(rng)
            c = parse_critique(json.dumps(doc))
            assert parse_critique(render_critique(c)) == c

        manifest = json.loads((FIXTURES / "documents" / "expected_errors.json").read_text("utf-8"))
        assert len(manifest) >= 6
        for filename, expectation in manifest.items():
            raw = (FIXTURES / "documents" / filename).read_text("utf-8")
            parser = parse_trajectory if expectation["kind"] == "trajectory" else parse_critique
            with pytest.raises((SchemaViolation, DataflowViolation)) as err:
                parser(raw)
            assert err.value.path == expectation["path"], (filename, err.value.path)

        # The valid fixtures parse, fenced output identically to bare.
        bare = parse_trajectory((FIXTURES / "documents" / "trajectory_minimal.json").read_text("utf-8"))
        fenced = parse_trajectory((FIXTURES / "documents" / "trajectory_fenced.txt").read_text("utf-8"))
        assert bare == fenced
        normalized = parse_critique(
            (FIXTURES / "documents" / "critique_approve_with_issues.json").read_text("utf-8")
        )
        assert normalized.decision == "revise"


def test_service_end_to_end(tmp_path):
    with Budget("Service e2e: POST -> poll -> map, restart reproduces state", 60.0):
        golden_doc = json.loads(
            (FIXTURES / "trajectories" / "mountain_island.json").read_text("utf-8")
        )
        config = {
            "actor": {"backend": "scripted", "plans": [golden_doc]},
            "critic": {"backend": "rule_based"},
            "max_iterations": 1,
            "seed": 42,
        }
        data_dir = tmp_path / "data"
        client = TestClient(create_app(SessionStore(data_dir)))
        response = client.post("/sessions", json={"prompt": "mountain island", "config": config})
        assert response.status_code == 201
        session_id = response.json()["session_id"]

        deadline = time.time() + 30
        status = None
        while time.time() < deadline:
            status = client.get(f"/sessions/{session_id}").json()
            if status["phase"] in ("done", "failed"):
                break
            time.sleep(0.02)
        assert status is not None and status["phase"] == "done", status

        map_doc = client.get(f"/sessions/{session_id}/map").json()
        assert map_doc["format"] == "map-artifact/1"
        trace = client.get(f"/sessions/{session_id}/trace").json()
        assert len(trace["rounds"][0]["iterations"]) >= 1

        persisted = data_dir / "sessions" / session_id
        assert (persisted / "meta.json").exists()
        assert (persisted / "trace.jsonl").exists()
        assert (persisted / "map.json").exists()

        restarted = TestClient(create_app(SessionStore(data_dir)))
        assert restarted.get(f"/sessions/{session_id}").json() == status
        assert restarted.get(f"/sessions/{session_id}/map").json() == map_doc
        assert restarted.get(f"/sessions/{session_id}/trace").json() == trace
