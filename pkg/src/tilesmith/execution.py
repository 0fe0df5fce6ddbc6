"""Runs a trajectory against the engine, step by step, into a map artifact.

Planning and execution are deliberately separate: the executor accepts any
parsed trajectory (approved or best-effort), re-validates each step's
arguments as defense in depth, resolves "@binding" references, and records
per-step diagnostics.  Failures are data in the report — they never
propagate as exceptions — and every step after the first failure is
skipped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .artifact import Layer, MapArtifact, Placement
from .generators import gen_cellular_automata, gen_maze, gen_noise_region
from .grid import TileGrid
from .modifiers import build_height_layers, mod_keep_largest_region, mod_morph, mod_smooth, scatter
from .plans import ToolStep, Trajectory, trajectory_digest
from .registry import BINDING_PREFIX, Registry, apply_defaults, validate_arguments
from .rng import derive_seed

ENGINE_OPERATIONS = {
    "gen_cellular_automata": gen_cellular_automata,
    "gen_noise_region": gen_noise_region,
    "gen_maze": gen_maze,
    "mod_smooth": mod_smooth,
    "mod_morph": mod_morph,
    "mod_keep_largest_region": mod_keep_largest_region,
    "build_height_layers": build_height_layers,
    "scatter": scatter,
}


@dataclass
class StepReport:
    index: int
    status: str  # ok | failed | skipped
    output_kind: str | None = None
    diagnostics: str = ""

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "status": self.status,
            "output_kind": self.output_kind,
            "diagnostics": self.diagnostics,
        }


@dataclass
class ExecutionReport:
    steps: list[StepReport] = field(default_factory=list)
    artifact: MapArtifact | None = None
    failed_step: int | None = None

    @property
    def ok(self) -> bool:
        return self.artifact is not None

    def to_dict(self) -> dict:
        return {
            "steps": [s.to_dict() for s in self.steps],
            "artifact": self.artifact.to_dict() if self.artifact is not None else None,
            "failed_step": self.failed_step,
        }


def step_verify(step: ToolStep, output) -> str:
    """Structural facts about a step output, next to the plan's expectation.

    No semantic matching happens here: the expected_result is free text for
    a human or LLM to compare against, so we only report what is countable.
    """
    if isinstance(output, TileGrid):
        facts = f"grid {output.width}x{output.height}, {output.alive_count()} alive cells"
    elif isinstance(output, list) and output and isinstance(output[0], Layer):
        parts = ", ".join(f"{l.name} ({l.grid.alive_count()} alive)" for l in output)
        facts = f"{len(output)} layers: {parts}"
    elif isinstance(output, list):
        kinds = sorted({p.kind for p in output}) if output else []
        label = f" of kind {kinds[0]!r}" if len(kinds) == 1 else ""
        facts = f"{len(output)} placements{label}"
    else:
        facts = f"output of type {type(output).__name__}"
    return f"{facts}; expected: {step.expected_result}"


def execute(trajectory: Trajectory, registry: Registry, master_seed: int) -> ExecutionReport:
    """Run every step in order and assemble the artifact.

    Steps without an explicit `seed` argument get a deterministic per-step
    seed derived from `master_seed` and the step index, so re-running the
    same (trajectory, seed) pair reproduces the artifact bit for bit while
    plans that pin their own seeds stay in full control.
    """
    report = ExecutionReport()
    bindings: dict[str, object] = {}
    layers: list[Layer] = []
    placement_acc: list[Placement] = []

    for i, step in enumerate(trajectory.tool_plan):
        if report.failed_step is not None:
            report.steps.append(StepReport(index=i, status="skipped"))
            continue
        step_report = _run_step(i, step, registry, master_seed, bindings, layers, placement_acc)
        report.steps.append(step_report)
        if step_report.status == "failed":
            report.failed_step = i

    if report.failed_step is None:
        report.artifact = MapArtifact(
            layers=tuple(layers),
            placements=tuple(placement_acc),
            seed=master_seed,
            provenance=trajectory_digest(trajectory),
        )
    return report


def _run_step(
    index: int,
    step: ToolStep,
    registry: Registry,
    master_seed: int,
    bindings: dict,
    layers: list[Layer],
    placement_acc: list[Placement],
) -> StepReport:
    tool = registry.get(step.tool_name)
    if tool is None:
        return StepReport(index, "failed", diagnostics=f"unknown tool {step.tool_name!r}")

    issues = validate_arguments(tool, step.arguments)
    if issues:
        return StepReport(
            index, "failed", diagnostics="invalid arguments: " + "; ".join(str(x) for x in issues)
        )

    args = apply_defaults(tool, step.arguments)

    # Resolve @binding references into actual outputs.
    input_kinds = {spec.name: kind for spec, kind in zip(tool.input_parameters(), tool.consumes)}
    for name, value in list(args.items()):
        if not (isinstance(value, str) and value.startswith(BINDING_PREFIX)):
            if name in input_kinds:
                return StepReport(
                    index, "failed",
                    diagnostics=f"{name}: step input must be an \"@binding\" reference, got {value!r}",
                )
            continue
        ref = value[len(BINDING_PREFIX):]
        if name not in input_kinds:
            return StepReport(
                index, "failed", diagnostics=f"{name}: parameter does not accept a step output"
            )
        if ref not in bindings:
            return StepReport(
                index, "failed", diagnostics=f"{name}: no earlier step bound {ref!r}"
            )
        resolved = bindings[ref]
        if _kind_of(resolved) != input_kinds[name]:
            return StepReport(
                index,
                "failed",
                diagnostics=f"{name}: binding {ref!r} holds {_kind_of(resolved)}, "
                f"needs {input_kinds[name]}",
            )
        args[name] = resolved

    if tool.parameter("seed") is not None and "seed" not in step.arguments:
        args["seed"] = derive_seed(master_seed, index)

    # Composition bookkeeping so placements can never dangle.
    if step.tool_name == "scatter":
        target = args.get("target")
        layer = next((l for l in layers if l.name == args.get("layer_name")), None)
        if layer is None:
            return StepReport(
                index,
                "failed",
                diagnostics=f"layer_name {args.get('layer_name')!r} not built by an earlier step",
            )
        if isinstance(target, TileGrid) and (target.width, target.height) != (
            layer.grid.width,
            layer.grid.height,
        ):
            return StepReport(
                index,
                "failed",
                diagnostics=f"target grid {target.width}x{target.height} does not match layer "
                f"{layer.name!r} ({layer.grid.width}x{layer.grid.height})",
            )

    try:
        output = ENGINE_OPERATIONS[step.tool_name](**args)
    except KeyError:
        return StepReport(index, "failed", diagnostics=f"no engine operation for {step.tool_name!r}")
    except TypeError as e:
        return StepReport(index, "failed", diagnostics=f"argument mismatch: {e}")
    except Exception as e:  # engine-level range/dimension errors become step failures
        return StepReport(index, "failed", diagnostics=f"{type(e).__name__}: {e}")

    if step.tool_name == "build_height_layers":
        # Tier names are fixed (tier_0..tier_{n-1}), so a plan gets exactly
        # one successful build step; a second one would shadow the first.
        clash = {l.name for l in output} & {l.name for l in layers}
        if clash:
            return StepReport(
                index, "failed", diagnostics=f"layer names already emitted: {sorted(clash)}"
            )
        layers.extend(output)
    elif step.tool_name == "scatter":
        placement_acc.extend(output)

    if step.output_binding is not None:
        bindings[step.output_binding] = output

    return StepReport(
        index, "ok", output_kind=_kind_of(output), diagnostics=step_verify(step, output)
    )


def _kind_of(output) -> str:
    if isinstance(output, TileGrid):
        return "grid"
    if isinstance(output, list) and output and isinstance(output[0], Layer):
        return "layers"
    if isinstance(output, list):
        return "placements"
    return "unknown"
