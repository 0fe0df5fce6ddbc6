"""pcgctl: command-line front door for generation, validation, and serving."""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from .agents import AgentConfig, RuleBasedCritic, ScriptedActor, make_actor, make_critic, validate_plan
from .evaluation import (
    ARCHITECTURES,
    FAMILY_PROMPTS,
    MOUNTAIN_PROMPT,
    bundled_plan,
    render_experiment_one_markdown,
    run_experiment_one,
    run_experiment_two,
)
from .execution import execute
from .plans import ParseError, parse_trajectory
from .refinement import refine, trace_to_lines
from .registry import Registry, default_registry, render_documentation
from .service import SessionStore, create_app

log = logging.getLogger(__name__)


def _load_config(path: str | None) -> dict:
    """Optional TOML/JSON config file; flat or sectioned keys."""
    if not path:
        return {}
    text = Path(path).read_text(encoding="utf-8")
    if path.endswith(".json"):
        return json.loads(text)
    try:
        import tomllib  # py311+
    except ImportError:
        import tomli as tomllib
    return tomllib.loads(text)


def _cfg(ctx, *keys, default=None):
    """Fetch a possibly nested key from the loaded config file."""
    node = ctx.obj.get("config", {})
    for key in keys:
        if not isinstance(node, dict) or key not in node:
            return default
        node = node[key]
    return node


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="TOML or JSON config file.")
@click.option("-v", "--verbose", is_flag=True, help="Debug logging.")
@click.pass_context
def main(ctx, config_path, verbose):
    """Natural-language map generation with a dual-agent planning loop."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    ctx.ensure_object(dict)
    ctx.obj["config"] = _load_config(config_path)


def _scripted_actor_from(paths, registry: Registry) -> ScriptedActor:
    if paths:
        plans = [parse_trajectory(Path(p).read_text(encoding="utf-8")) for p in paths]
    else:
        plans = [bundled_plan(registry, "mountain_island")]
    return ScriptedActor(plans)


@main.command()
@click.option("--prompt", default=MOUNTAIN_PROMPT, show_default=False,
              help="Natural-language map description.")
@click.option("--backend", type=click.Choice(["llm", "scripted"]), default="scripted",
              show_default=True)
@click.option("--scripted-plan", "scripted_plans", multiple=True, type=click.Path(exists=True),
              help="Trajectory JSON replayed by the scripted actor (repeatable).")
@click.option("--max-iterations", "-k", default=None, type=int,
              help="Critique/revision cap K (default 1, or config value).")
@click.option("--seed", default=None, type=int, help="Master seed (default 0).")
@click.option("--out-dir", "-o", default="out", type=click.Path(), show_default=True)
@click.option("--serve-result", is_flag=True, help="Serve the result over HTTP when done.")
@click.option("--port", default=8000, show_default=True)
@click.pass_context
def generate(ctx, prompt, backend, scripted_plans, max_iterations, seed, out_dir, serve_result, port):
    """Refine a plan from the prompt, execute it, and write map + trace."""
    registry = default_registry()
    k = max_iterations if max_iterations is not None else _cfg(ctx, "max_iterations", default=1)
    master_seed = seed if seed is not None else _cfg(ctx, "seed", default=0)

    if backend == "scripted":
        actor = _scripted_actor_from(scripted_plans, registry)
    else:
        actor = make_actor(AgentConfig.from_env("actor"))
    critic = (
        RuleBasedCritic(registry)
        if backend == "scripted"
        else make_critic(AgentConfig.from_env("critic"), registry)
    )

    trace = refine(prompt, registry, actor, critic, k)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "trace.jsonl").write_text("\n".join(trace_to_lines(trace)) + "\n", encoding="utf-8")
    click.echo(f"refinement outcome: {trace.outcome} "
               f"({trace.actor_calls()} actor / {trace.critic_calls()} critic calls)")

    if trace.final_trajectory is None:
        click.echo(f"no trajectory produced: {trace.error}", err=True)
        sys.exit(1)

    report = execute(trace.final_trajectory, registry, master_seed=master_seed)
    if report.artifact is None:
        step = report.failed_step
        click.echo(f"execution failed at step {step}: {report.steps[step].diagnostics}", err=True)
        sys.exit(1)
    (out / "map.json").write_text(report.artifact.to_json() + "\n", encoding="utf-8")
    click.echo(f"wrote {out / 'map.json'} ({len(report.artifact.layers)} layers, "
               f"{len(report.artifact.placements)} placements) and {out / 'trace.jsonl'}")

    if serve_result:
        store = SessionStore(out)
        config = _service_config_for_replay(trace)
        session = store.create_session(prompt, config)
        click.echo(f"serving result as session {session.id} on http://127.0.0.1:{port}")
        import uvicorn

        uvicorn.run(create_app(store), host="127.0.0.1", port=port, log_level="warning")


def _service_config_for_replay(trace):
    from .service import AgentSpec, SessionConfig

    return SessionConfig(
        actor=AgentSpec(backend="scripted", plans=[trace.final_trajectory.to_dict()]),
        critic=AgentSpec(backend="rule_based"),
        max_iterations=0,
    )


@main.command()
@click.argument("trajectory_file", type=click.Path(exists=True))
def validate(trajectory_file):
    """Run the rule critic over a trajectory file; exit 0 only on approve."""
    registry = default_registry()
    try:
        trajectory = parse_trajectory(Path(trajectory_file).read_text(encoding="utf-8"))
    except ParseError as e:
        click.echo(f"parse error: {e}", err=True)
        sys.exit(2)
    issues = validate_plan(trajectory, registry)
    if not issues:
        click.echo("approve: no blocking issues")
        return
    click.echo(f"revise: {len(issues)} blocking issue(s)")
    for issue in issues:
        where = f"step {issue.step_index}" if issue.step_index is not None else "plan"
        click.echo(f"  [{issue.dimension}] {where}: {issue.description}")
        if issue.correction_suggestion:
            click.echo(f"    suggestion: {issue.correction_suggestion}")
    sys.exit(1)


@main.command(name="execute")
@click.argument("trajectory_file", type=click.Path(exists=True))
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("-o", "--out", "out_file", default="map.json", show_default=True, type=click.Path())
@click.option("--ascii", "show_ascii", is_flag=True, help="Print each layer as ASCII art.")
def execute_cmd(trajectory_file, seed, out_file, show_ascii):
    """Execute a trajectory against the engine; exit 0 only if a map results."""
    registry = default_registry()
    try:
        trajectory = parse_trajectory(Path(trajectory_file).read_text(encoding="utf-8"))
    except ParseError as e:
        click.echo(f"parse error: {e}", err=True)
        sys.exit(2)
    report = execute(trajectory, registry, master_seed=seed)
    for step in report.steps:
        click.echo(f"step {step.index}: {step.status}"
                   + (f" — {step.diagnostics}" if step.diagnostics else ""))
    if report.artifact is None:
        sys.exit(1)
    Path(out_file).write_text(report.artifact.to_json() + "\n", encoding="utf-8")
    click.echo(f"wrote {out_file}")
    if show_ascii:
        for layer in report.artifact.layers_by_height():
            click.echo(f"--- {layer.name} (height {layer.height_index}, {layer.material}) ---")
            click.echo(layer.grid.to_ascii())


@main.command()
@click.option("--experiment", type=click.Choice(["one", "two"]), required=True)
@click.option("--backend", type=click.Choice(["llm", "scripted"]), default="scripted",
              show_default=True)
@click.option("--trials", default=10, show_default=True, type=int)
@click.option("--k", "max_iterations", default=1, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--family", type=click.Choice(sorted(FAMILY_PROMPTS)), default="mountain_island",
              show_default=True, help="Map family (experiment two).")
@click.option("--architecture", type=click.Choice(ARCHITECTURES), default="actor_critic",
              show_default=True, help="Agent architecture (experiment two).")
@click.option("--followup", "followups", multiple=True,
              help="Scripted follow-up prompt (repeatable; experiment two).")
@click.option("--out", "out_file", default="report.json", show_default=True, type=click.Path())
def eval(experiment, backend, trials, max_iterations, seed, family, architecture, followups, out_file):
    """Run the experiment apparatus and write a report."""
    registry = default_registry()

    if backend == "scripted":
        def actor_factory():
            # Enough plan copies for the initial round plus every follow-up.
            plan = bundled_plan(registry, family if experiment == "two" else "mountain_island")
            return ScriptedActor([plan] * (1 + len(followups)))
        actor = actor_factory
        critic = lambda: RuleBasedCritic(registry)  # noqa: E731
    else:
        actor = make_actor(AgentConfig.from_env("actor"))
        critic = make_critic(AgentConfig.from_env("critic"), registry)

    if experiment == "one":
        report = run_experiment_one(actor, critic, max_iterations, trials, seed, registry=registry)
        click.echo(render_experiment_one_markdown(report))
    else:
        result = run_experiment_two(
            architecture,
            family,
            list(followups),
            actor=actor,
            critic=critic,
            max_iterations=max_iterations,
            registry=registry,
            seed=seed,
        )
        report = result.to_dict()
        click.echo(f"| Map | {family} |")
        click.echo(f"| Tokens used | {result.record.token_usage.total_tokens} |")
        click.echo(f"| Prompts required | {result.prompts_required} |")
        click.echo(f"| Achieves objective | {'yes' if result.achieved else 'no'} |")
    Path(out_file).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    click.echo(f"wrote {out_file}")


@main.group()
def tools():
    """Inspect the tool registry."""


@tools.command(name="list")
def tools_list():
    registry = default_registry()
    for name in registry.names():
        tool = registry.get(name)
        click.echo(f"{name:28s} [{tool.category}] -> {tool.produces}")


@tools.command(name="show")
@click.argument("name")
def tools_show(name):
    registry = default_registry()
    tool = registry.get(name)
    if tool is None:
        click.echo(f"unknown tool {name!r}; try: pcgctl tools list", err=True)
        sys.exit(1)
    click.echo(render_documentation(Registry([tool], version=registry.version)))


@main.command()
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--data-dir", default="data", show_default=True, type=click.Path())
@click.option("--ui-dir", default=None, type=click.Path(),
              help="Static UI assets to mount at /ui (default: frontend/dist if present).")
@click.pass_context
def serve(ctx, port, host, data_dir, ui_dir):
    """Run the HTTP service."""
    import uvicorn

    data_dir = _cfg(ctx, "data_dir", default=data_dir) if data_dir == "data" else data_dir
    store = SessionStore(data_dir)
    if ui_dir is None and Path("frontend/dist").is_dir():
        ui_dir = "frontend/dist"
    app = create_app(store, ui_dir=ui_dir)
    click.echo(f"listening on http://{host}:{port} (data in {data_dir})")
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
