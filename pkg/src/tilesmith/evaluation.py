"""Experimental apparatus: constraint checks, trial protocols, and reports.

Experiment one runs repeated refine-execute-check trials of the fixed
four-constraint mountain task and reports success rate, mistakes per
successful run, and failure reasons.  Experiment two runs one map family
with scripted (or interactive) follow-up prompts and reports token usage,
prompts required, and objective completion.  Constraint severities follow
the usable/unusable rubric: a `failure` makes the map unusable, a
`mistake` is a suboptimal but survivable choice.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .agents import TokenUsage
from .artifact import Layer, MapArtifact
from .execution import execute
from .modifiers import count_regions
from .refinement import RefinementTrace, refine
from .registry import Registry, default_registry
from .rng import derive_seed

MOUNTAIN_PROMPT = (
    "Create a mountain island map: one single connected mountain mass (no "
    "separate land masses), exactly three stacked height tiers, grass spots "
    "placed only on the top tier, and rocks scattered outside the mountain."
)

FAMILY_PROMPTS = {
    "beach2d": (
        "Create a 2D beach map: one connected band of sand, with shells "
        "scattered sparsely across the sand."
    ),
    "mountain_island": MOUNTAIN_PROMPT,
    "golf_course": (
        "Create a hilly golf course: two stacked grass tiers forming gentle "
        "hills, with trees scattered outside the fairway."
    ),
    "maze2d": (
        "Create a 2D escape maze whose corridors connect every area with "
        "exactly one route between any two points."
    ),
}

ARCHITECTURES = ("actor_critic", "actor_with_resources", "actor_bare")


@dataclass(frozen=True)
class ConstraintResult:
    constraint_id: str
    satisfied: bool
    measured: str
    severity: str  # failure | mistake

    def to_dict(self) -> dict:
        return {
            "constraint_id": self.constraint_id,
            "satisfied": self.satisfied,
            "measured": self.measured,
            "severity": self.severity,
        }


@dataclass
class TrialRecord:
    trial_index: int
    outcome: str  # success | failure
    mistakes: int
    constraint_results: list[ConstraintResult]
    token_usage: TokenUsage
    followup_prompts: int = 0

    def to_dict(self) -> dict:
        return {
            "trial_index": self.trial_index,
            "outcome": self.outcome,
            "mistakes": self.mistakes,
            "constraint_results": [c.to_dict() for c in self.constraint_results],
            "token_usage": self.token_usage.to_dict(),
            "followup_prompts": self.followup_prompts,
        }


# ---------------------------------------------------------------------------
# Constraint checkers (the four mountain constraints + family extras)


def check_single_landmass(artifact: MapArtifact, connectivity: str = "eight") -> ConstraintResult:
    """The base layer must form exactly one connected land mass.

    An empty base is unusable (failure); several masses still render, so
    extra regions count as a mistake.
    """
    base = artifact.base_layer()
    regions = count_regions(base.grid, connectivity) if base is not None else 0
    return ConstraintResult(
        constraint_id="single_landmass",
        satisfied=regions == 1,
        measured=f"regions={regions}",
        severity="failure" if regions == 0 else "mistake",
    )


def check_layer_count(artifact: MapArtifact, required: int, material: str = "terrain") -> ConstraintResult:
    """Exactly `required` non-empty layers of the given material.

    Empty tiers do not count: an emitted-but-empty tier means the shrink
    ate the structure, which reads as missing height (failure).  Extra
    non-empty tiers are a mistake.
    """
    non_empty = sum(
        1 for l in artifact.layers if l.material == material and not l.grid.is_empty()
    )
    if non_empty < required:
        severity = "failure"
    else:
        severity = "mistake"
    return ConstraintResult(
        constraint_id="layer_count",
        satisfied=non_empty == required,
        measured=f"non_empty_{material}_layers={non_empty} required={required}",
        severity=severity,
    )


def _topmost_non_empty(artifact: MapArtifact) -> Layer | None:
    candidates = [l for l in artifact.layers_by_height() if not l.grid.is_empty()]
    return candidates[-1] if candidates else None


def check_scatter_on_layer(artifact: MapArtifact, kind: str) -> ConstraintResult:
    """Every placement of `kind` sits on an alive cell of the peak layer,
    and at least one exists (the constraint demands presence)."""
    peak = _topmost_non_empty(artifact)
    placements = [p for p in artifact.placements if p.kind == kind]
    if not placements:
        return ConstraintResult(
            constraint_id=f"{kind}_on_peak",
            satisfied=False,
            measured="count=0",
            severity="mistake",
        )
    if peak is None:
        return ConstraintResult(
            constraint_id=f"{kind}_on_peak",
            satisfied=False,
            measured="no non-empty layer",
            severity="mistake",
        )
    offenders = [
        p for p in placements if p.layer_name != peak.name or not bool(peak.grid.cells[p.y, p.x])
    ]
    if offenders:
        p = offenders[0]
        measured = (
            f"count={len(placements)} offenders={len(offenders)} "
            f"first={p.kind}@({p.x},{p.y}) on {p.layer_name}"
        )
    else:
        measured = f"count={len(placements)} all on {peak.name}"
    return ConstraintResult(
        constraint_id=f"{kind}_on_peak",
        satisfied=not offenders,
        measured=measured,
        severity="mistake",
    )


def check_scatter_off_mask(artifact: MapArtifact, kind: str) -> ConstraintResult:
    """Every placement of `kind` sits on a dead cell of the base layer, and
    at least one exists."""
    base = artifact.base_layer()
    placements = [p for p in artifact.placements if p.kind == kind]
    if not placements:
        return ConstraintResult(
            constraint_id=f"{kind}_off_mask",
            satisfied=False,
            measured="count=0",
            severity="mistake",
        )
    if base is None:
        return ConstraintResult(
            constraint_id=f"{kind}_off_mask",
            satisfied=False,
            measured="no base layer",
            severity="mistake",
        )
    offenders = [p for p in placements if bool(base.grid.cells[p.y, p.x])]
    if offenders:
        p = offenders[0]
        measured = f"count={len(placements)} offenders={len(offenders)} first={p.kind}@({p.x},{p.y})"
    else:
        measured = f"count={len(placements)} all off the mask"
    return ConstraintResult(
        constraint_id=f"{kind}_off_mask",
        satisfied=not offenders,
        measured=measured,
        severity="mistake",
    )


def check_maze_corridors(artifact: MapArtifact) -> ConstraintResult:
    """Corridors (dead cells of the base layer) form one spanning tree:
    connected, with 4-adjacency edge count exactly nodes - 1."""
    base = artifact.base_layer()
    if base is None:
        return ConstraintResult("maze_corridors", False, "no base layer", "failure")
    corridors = ~base.grid.cells
    nodes = int(corridors.sum())
    if nodes == 0:
        return ConstraintResult("maze_corridors", False, "corridors=0", "failure")
    edges = int((corridors[:, :-1] & corridors[:, 1:]).sum()) + int(
        (corridors[:-1, :] & corridors[1:, :]).sum()
    )
    components = count_regions_of(corridors, "four")
    ok = components == 1 and edges == nodes - 1
    return ConstraintResult(
        constraint_id="maze_corridors",
        satisfied=ok,
        measured=f"corridors={nodes} edges={edges} components={components}",
        severity="mistake",
    )


def count_regions_of(cells, connectivity: str) -> int:
    from .grid import TileGrid

    return count_regions(TileGrid(cells), connectivity)


def mountain_constraints(artifact: MapArtifact) -> list[ConstraintResult]:
    """The four-constraint mountain rubric, in fixed order."""
    return [
        check_single_landmass(artifact),
        check_layer_count(artifact, required=3, material="terrain"),
        check_scatter_on_layer(artifact, kind="grass_spot"),
        check_scatter_off_mask(artifact, kind="rock"),
    ]


_FAMILY_EXAMPLE_TOOL = {
    "mountain_island": "gen_cellular_automata",
    "beach2d": "gen_noise_region",
    "maze2d": "gen_maze",
    "golf_course": "build_height_layers",
}


def bundled_plan(registry: Registry, family: str):
    """The registry's validated usage example for a family, as a Trajectory."""
    import json as _json

    from .plans import parse_trajectory

    tool_name = _FAMILY_EXAMPLE_TOOL.get(family)
    if tool_name is None:
        raise ValueError(f"unknown map family {family!r}")
    tool = registry.get(tool_name)
    if tool is None or not tool.examples:
        raise ValueError(f"registry carries no bundled example for {family!r}")
    return parse_trajectory(_json.dumps(tool.examples[0].trajectory_doc()))


def family_constraints(artifact: MapArtifact, family: str) -> list[ConstraintResult]:
    if family == "mountain_island":
        return mountain_constraints(artifact)
    if family == "beach2d":
        return [
            check_layer_count(artifact, required=1, material="sand"),
            check_scatter_on_layer(artifact, kind="shell"),
        ]
    if family == "golf_course":
        return [
            check_layer_count(artifact, required=2, material="grass"),
            check_scatter_off_mask(artifact, kind="tree"),
        ]
    if family == "maze2d":
        return [
            check_layer_count(artifact, required=1, material="wall"),
            check_maze_corridors(artifact),
        ]
    raise ValueError(f"unknown map family {family!r}")


def _unevaluated(constraints_for, reason: str) -> list[ConstraintResult]:
    """Totality filler when execution produced no artifact: every constraint
    is reported unsatisfied at failure severity with the reason."""
    ids = {
        "mountain_island": ["single_landmass", "layer_count", "grass_spot_on_peak", "rock_off_mask"],
        "beach2d": ["layer_count", "shell_on_peak"],
        "golf_course": ["layer_count", "tree_off_mask"],
        "maze2d": ["layer_count", "maze_corridors"],
    }[constraints_for]
    return [
        ConstraintResult(constraint_id=cid, satisfied=False, measured=reason, severity="failure")
        for cid in ids
    ]


def classify_trial(
    trial_index: int,
    constraint_results: list[ConstraintResult],
    token_usage: TokenUsage,
    followup_prompts: int = 0,
) -> TrialRecord:
    """Success iff no failure-severity constraint is unsatisfied; mistakes
    count the unsatisfied mistake-severity ones."""
    failed = [c for c in constraint_results if not c.satisfied and c.severity == "failure"]
    mistakes = sum(1 for c in constraint_results if not c.satisfied and c.severity == "mistake")
    return TrialRecord(
        trial_index=trial_index,
        outcome="failure" if failed else "success",
        mistakes=mistakes,
        constraint_results=constraint_results,
        token_usage=token_usage,
        followup_prompts=followup_prompts,
    )


def _fresh(agent_or_factory):
    """Accept either a ready agent or a zero-arg factory producing one.

    Scripted agents hold a one-shot queue, so multi-trial protocols want a
    factory; stateless agents can be passed directly.
    """
    if isinstance(agent_or_factory, type):
        return agent_or_factory()
    if callable(agent_or_factory) and not hasattr(agent_or_factory, "propose") and not hasattr(
        agent_or_factory, "review"
    ):
        return agent_or_factory()
    return agent_or_factory


# ---------------------------------------------------------------------------
# Experiment I: ten-trial reliability protocol


def run_experiment_one(
    actor,
    critic,
    max_iterations: int,
    trials: int,
    seed_base: int,
    *,
    registry: Registry | None = None,
    prompt: str = MOUNTAIN_PROMPT,
) -> dict:
    """Full refine->execute->check pipeline over `trials` independent runs.

    `actor`/`critic` may be agents or zero-arg factories.  Trial t executes
    with master seed seed_base + t.  Returns the report dict (success rate,
    mistakes per successful run, failure/mistake reason distributions,
    per-trial records).
    """
    registry = registry or default_registry()
    records: list[TrialRecord] = []
    for t in range(trials):
        trace = refine(
            prompt,
            registry,
            _fresh(actor),
            _fresh(critic),
            max_iterations,
            session_id=f"exp1-trial-{t}",
        )
        usage = trace.total_usage()
        if trace.final_trajectory is None:
            results = _unevaluated("mountain_island", f"refinement aborted: {trace.error}")
            records.append(classify_trial(t, results, usage))
            continue
        report = execute(trace.final_trajectory, registry, master_seed=seed_base + t)
        if report.artifact is None:
            reason = f"execution failed at step {report.failed_step}"
            results = _unevaluated("mountain_island", reason)
        else:
            results = mountain_constraints(report.artifact)
        records.append(classify_trial(t, results, usage))

    return build_experiment_one_report(records)


def build_experiment_one_report(records: list[TrialRecord]) -> dict:
    successes = [r for r in records if r.outcome == "success"]
    failure_reasons: dict[str, int] = {}
    mistake_reasons: dict[str, int] = {}
    for r in records:
        for c in r.constraint_results:
            if c.satisfied:
                continue
            if r.outcome == "failure" and c.severity == "failure":
                failure_reasons[c.constraint_id] = failure_reasons.get(c.constraint_id, 0) + 1
            if r.outcome == "success" and c.severity == "mistake":
                mistake_reasons[c.constraint_id] = mistake_reasons.get(c.constraint_id, 0) + 1
    avg_mistakes = (
        sum(r.mistakes for r in successes) / len(successes) if successes else None
    )
    total_usage = TokenUsage(agent_role="total")
    for r in records:
        total_usage = total_usage + r.token_usage
    return {
        "experiment": "one",
        "trials": len(records),
        "successes": len(successes),
        "success_rate": (len(successes) / len(records)) if records else 0.0,
        "avg_mistakes_per_successful_run": avg_mistakes,
        "failure_reasons": failure_reasons,
        "mistake_reasons": mistake_reasons,
        "token_totals": total_usage.to_dict(),
        "records": [r.to_dict() for r in records],
    }


def render_experiment_one_markdown(report: dict) -> str:
    """Markdown table in the shape of the reliability-comparison table."""
    lines = [
        "| Metric | Value |",
        "| --- | --- |",
        f"| Success Rate (%) | {report['success_rate'] * 100:.0f} |",
    ]
    avg = report["avg_mistakes_per_successful_run"]
    lines.append(
        f"| Average mistakes (per successful run) | {avg:.2f} |" if avg is not None else
        "| Average mistakes (per successful run) | n/a |"
    )
    lines.append("| **Failure reasons** | count |")
    for reason, count in sorted(report["failure_reasons"].items()):
        lines.append(f"| {reason} | {count} |")
    lines.append("| **Mistakes (successful runs)** | count |")
    for reason, count in sorted(report["mistake_reasons"].items()):
        lines.append(f"| {reason} | {count} |")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Experiment II: follow-up efficiency protocol


@dataclass
class ExperimentTwoResult:
    record: TrialRecord
    traces: list[RefinementTrace]
    prompts_required: int
    achieved: bool
    rounds: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "experiment": "two",
            "record": self.record.to_dict(),
            "prompts_required": self.prompts_required,
            "achieves_objective": self.achieved,
            "rounds": self.rounds,
            "token_totals": self.record.token_usage.to_dict(),
        }


def run_experiment_two(
    architecture: str,
    map_family: str,
    followups: list[str],
    *,
    actor,
    critic=None,
    max_iterations: int = 1,
    registry: Registry | None = None,
    seed: int = 0,
    initial_prompt: str | None = None,
) -> ExperimentTwoResult:
    """One map-family task with up to `len(followups)` corrective rounds.

    Round r appends followups[:r] to the user intent and restarts
    refinement.  Single-agent architectures run with no critic (the
    proposal is taken as-is); `actor_bare` additionally drops docs and
    examples from the prompt.  The loop stops on the first round whose
    executed artifact satisfies the family's whole constraint suite.
    """
    if architecture not in ARCHITECTURES:
        raise ValueError(f"unknown architecture {architecture!r}")
    if map_family not in FAMILY_PROMPTS:
        raise ValueError(f"unknown map family {map_family!r}")
    registry = registry or default_registry()
    base_prompt = initial_prompt or FAMILY_PROMPTS[map_family]

    docs = examples = None
    if architecture == "actor_bare":
        docs = examples = ""
    use_critic = architecture == "actor_critic"
    cap = max_iterations if use_critic else 0

    actor = _fresh(actor)
    critic_agent = _fresh(critic) if use_critic else None
    if use_critic and critic_agent is None:
        raise ValueError("actor_critic architecture needs a critic")

    traces: list[RefinementTrace] = []
    rounds: list[dict] = []
    total_usage = TokenUsage(agent_role="total")
    achieved = False
    last_results: list[ConstraintResult] = []

    max_rounds = 1 + len(followups)
    for round_index in range(max_rounds):
        extra = followups[:round_index]
        user_prompt = base_prompt
        if extra:
            user_prompt = base_prompt + "".join(f"\n\nFollow-up: {f}" for f in extra)
        trace = refine(
            user_prompt,
            registry,
            actor,
            critic_agent if use_critic else _NullCritic(),
            cap,
            docs=docs,
            examples=examples,
            session_id=f"exp2-{map_family}-round-{round_index}",
        )
        traces.append(trace)
        total_usage = total_usage + trace.total_usage()

        round_info = {"round": round_index, "outcome": trace.outcome, "prompt_chars": len(user_prompt)}
        if trace.final_trajectory is None:
            last_results = _unevaluated(map_family, f"refinement aborted: {trace.error}")
            round_info["executed"] = False
        else:
            report = execute(trace.final_trajectory, registry, derive_seed(seed, round_index))
            if report.artifact is None:
                last_results = _unevaluated(map_family, f"execution failed at step {report.failed_step}")
                round_info["executed"] = False
            else:
                last_results = family_constraints(report.artifact, map_family)
                round_info["executed"] = True
        round_info["satisfied"] = all(c.satisfied for c in last_results)
        rounds.append(round_info)
        if round_info["satisfied"]:
            achieved = True
            break

    prompts_required = len(rounds)
    record = classify_trial(0, last_results, total_usage, followup_prompts=prompts_required - 1)
    return ExperimentTwoResult(
        record=record,
        traces=traces,
        prompts_required=prompts_required,
        achieved=achieved,
        rounds=rounds,
    )


class _NullCritic:
    """Stands in when an architecture runs without a critic (K is 0, so it
    is never called; reaching review() means a protocol bug)."""

    def review(self, trajectory, docs=None, examples=None, user_prompt=None):
        raise AssertionError("critic disabled for this architecture")
