"""The iterative actor-critic dialogue with a state-replacement context.

The loop proposes an initial plan, then alternates critique and revision
until the critic approves or the iteration cap is reached, in which case
the last revision is returned unreviewed as a best effort.  The actor's
visible context is a fixed-size buffer holding at most one trajectory and
one critique; newer ones overwrite older ones, so prompt size does not
grow with iteration count.  Everything the experimenter needs afterwards
(every proposal, critique, token count) lives in the trace instead.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace

from .agents import AgentError, TokenUsage, build_actor_prompt, validate_plan
from .ids import new_session_id
from .plans import (
    BlockingIssue,
    Critique,
    Trajectory,
    parse_critique,
    parse_trajectory,
    trajectory_digest,
)
from .registry import Registry, render_documentation, render_examples

OUTCOMES = ("approved", "best_effort", "aborted")


@dataclass(frozen=True)
class ContextBuffer:
    """The agent-visible world: static grounding plus ONE plan and ONE critique.

    update_context replaces the trajectory/critique pair in place; older
    pairs are unrecoverable from the buffer (they live in the trace).
    """

    user_prompt: str
    docs: str
    examples: str
    current_trajectory: Trajectory | None = None
    latest_critique: Critique | None = None

    def render_actor_prompt(self) -> str:
        return build_actor_prompt(
            self.user_prompt,
            self.docs,
            self.examples,
            previous=self.current_trajectory,
            feedback=self.latest_critique,
        )


def update_context(
    buffer: ContextBuffer, new_trajectory: Trajectory, critique: Critique
) -> ContextBuffer:
    """Replace the buffer's trajectory/critique pair (never append)."""
    return replace(buffer, current_trajectory=new_trajectory, latest_critique=critique)


@dataclass
class IterationRecord:
    revision: int
    trajectory: Trajectory
    trajectory_digest: str
    actor_prompt: str
    actor_usage: TokenUsage
    critique: Critique | None = None
    critic_usage: TokenUsage | None = None
    wall_time: float = 0.0

    @property
    def token_usage(self) -> TokenUsage:
        total = self.actor_usage
        if self.critic_usage is not None:
            total = total + self.critic_usage
        return total

    def to_dict(self) -> dict:
        return {
            "revision": self.revision,
            "trajectory": self.trajectory.to_dict(),
            "trajectory_digest": self.trajectory_digest,
            "actor_prompt": self.actor_prompt,
            "critique": self.critique.to_dict() if self.critique is not None else None,
            "token_usage": self.token_usage.to_dict(),
            "actor_usage": self.actor_usage.to_dict(),
            "critic_usage": self.critic_usage.to_dict() if self.critic_usage else None,
            "wall_time": self.wall_time,
        }


@dataclass
class RefinementTrace:
    session_id: str
    iterations: list[IterationRecord] = field(default_factory=list)
    outcome: str = "aborted"
    final_trajectory: Trajectory | None = None
    final_validation: list[BlockingIssue] = field(default_factory=list)
    error: str | None = None

    def actor_calls(self) -> int:
        return len(self.iterations)

    def critic_calls(self) -> int:
        return sum(1 for it in self.iterations if it.critique is not None)

    def total_usage(self) -> TokenUsage:
        total = TokenUsage(agent_role="total")
        for it in self.iterations:
            total = total + it.token_usage
        return total

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "iterations": [it.to_dict() for it in self.iterations],
            "outcome": self.outcome,
            "final_trajectory": (
                self.final_trajectory.to_dict() if self.final_trajectory is not None else None
            ),
            "final_validation": [
                {
                    "dimension": i.dimension,
                    "description": i.description,
                    "step_index": i.step_index,
                    "correction_suggestion": i.correction_suggestion,
                }
                for i in self.final_validation
            ],
            "error": self.error,
            "token_totals": self.total_usage().to_dict(),
        }


def refine(
    user_prompt: str,
    registry: Registry,
    actor,
    critic,
    max_iterations: int,
    *,
    docs: str | None = None,
    examples: str | None = None,
    session_id: str | None = None,
) -> RefinementTrace:
    """Run the dual-agent refinement dialogue and return its full trace.

    `max_iterations` is the critique/revision cap K: with K=0 the initial
    proposal is returned unreviewed (best effort); a run the critic
    approves at iteration j costs j+1 actor and j+1 critic calls; an
    exhausted run costs K+1 actor and K critic calls.  The final revision
    after an exhausted loop is returned WITHOUT a critic pass, exactly as
    the cap semantics demand — a post-hoc rule validation is recorded in
    the trace for observability, but does not change the outcome.

    Agent failures (after the agents' own retries) abort the run; the
    trace keeps every call made before the failure.

    `docs`/`examples` default to renderings of the registry; pass "" to
    run an agent without that grounding.
    """
    if max_iterations < 0:
        raise ValueError("max_iterations must be >= 0")
    docs = render_documentation(registry) if docs is None else docs
    examples = render_examples(registry) if examples is None else examples
    trace = RefinementTrace(session_id=session_id or new_session_id())
    buffer = ContextBuffer(user_prompt=user_prompt, docs=docs, examples=examples)

    def propose() -> Trajectory:
        prompt = buffer.render_actor_prompt()
        started = time.monotonic()
        trajectory, usage = actor.propose(
            buffer.user_prompt,
            buffer.docs,
            buffer.examples,
            feedback=buffer.latest_critique,
            previous=buffer.current_trajectory,
        )
        trace.iterations.append(
            IterationRecord(
                revision=trajectory.revision,
                trajectory=trajectory,
                trajectory_digest=trajectory_digest(trajectory),
                actor_prompt=prompt,
                actor_usage=usage,
                wall_time=time.monotonic() - started,
            )
        )
        return trajectory

    try:
        current = propose()
    except AgentError as e:
        trace.outcome = "aborted"
        trace.error = f"actor failed: {e}"
        return trace

    iteration = 0
    while iteration < max_iterations:
        record = trace.iterations[-1]
        started = time.monotonic()
        try:
            critique, usage = critic.review(current, docs, examples, user_prompt)
        except AgentError as e:
            trace.outcome = "aborted"
            trace.error = f"critic failed: {e}"
            trace.final_trajectory = current
            return trace
        record.critique = critique
        record.critic_usage = usage
        record.wall_time += time.monotonic() - started

        if critique.decision == "approve":
            trace.outcome = "approved"
            trace.final_trajectory = current
            trace.final_validation = validate_plan(current, registry)
            return trace

        buffer = update_context(buffer, current, critique)
        try:
            current = propose()
        except AgentError as e:
            trace.outcome = "aborted"
            trace.error = f"actor failed: {e}"
            trace.final_trajectory = current
            return trace
        iteration += 1

    trace.outcome = "best_effort"
    trace.final_trajectory = current
    trace.final_validation = validate_plan(current, registry)
    return trace


# ---------------------------------------------------------------------------
# Line-delimited persistence (one refinement round per block of lines)


def trace_to_lines(trace: RefinementTrace, round_index: int = 0) -> list[str]:
    """Serialize a trace as JSONL lines tagged with the prompt round."""
    lines = []
    for it in trace.iterations:
        lines.append(
            json.dumps(
                {"type": "iteration", "round": round_index, "session_id": trace.session_id, **it.to_dict()},
                sort_keys=True,
            )
        )
    summary = trace.to_dict()
    summary.pop("iterations")
    lines.append(json.dumps({"type": "outcome", "round": round_index, **summary}, sort_keys=True))
    return lines


def traces_from_lines(lines: list[str]) -> list[RefinementTrace]:
    """Rebuild per-round traces from trace.jsonl lines."""
    rounds: dict[int, RefinementTrace] = {}
    for line in lines:
        if not line.strip():
            continue
        doc = json.loads(line)
        round_index = doc.get("round", 0)
        trace = rounds.setdefault(round_index, RefinementTrace(session_id=doc.get("session_id", "")))
        if doc["type"] == "iteration":
            critique = (
                parse_critique(json.dumps(doc["critique"])) if doc.get("critique") else None
            )
            critic_usage = (
                TokenUsage(**doc["critic_usage"]) if doc.get("critic_usage") else None
            )
            trace.iterations.append(
                IterationRecord(
                    revision=doc["revision"],
                    trajectory=parse_trajectory(json.dumps(doc["trajectory"])),
                    trajectory_digest=doc["trajectory_digest"],
                    actor_prompt=doc.get("actor_prompt", ""),
                    actor_usage=TokenUsage(**doc["actor_usage"]),
                    critique=critique,
                    critic_usage=critic_usage,
                    wall_time=doc.get("wall_time", 0.0),
                )
            )
        elif doc["type"] == "outcome":
            trace.session_id = doc.get("session_id", trace.session_id)
            trace.outcome = doc["outcome"]
            trace.error = doc.get("error")
            if doc.get("final_trajectory"):
                trace.final_trajectory = parse_trajectory(json.dumps(doc["final_trajectory"]))
            trace.final_validation = [
                BlockingIssue(
                    dimension=i["dimension"],
                    description=i["description"],
                    step_index=i.get("step_index"),
                    correction_suggestion=i.get("correction_suggestion"),
                )
                for i in doc.get("final_validation", [])
            ]
    return [rounds[k] for k in sorted(rounds)]
