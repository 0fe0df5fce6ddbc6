"""Actor and Critic behaviors behind a uniform interface.

Three backends exist: `llm` (chat-completions HTTP endpoint), `rule_based`
(deterministic static verifier, critic only), and `scripted` (canned
responses for tests and offline runs).  The rule-based critic checks the
three mechanically checkable review dimensions; goal alignment needs
semantics and is deliberately left to LLM critics.
"""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass
from importlib import resources

import httpx

from .plans import (
    BlockingIssue,
    Critique,
    ParseError,
    Trajectory,
    parse_critique,
    parse_trajectory,
    render_critique,
    render_trajectory,
)
from .registry import BINDING_PREFIX, Registry, validate_arguments

log = logging.getLogger(__name__)

ENV_API_KEY = "LLM_API_KEY"
ENV_ENDPOINT = "LLM_ENDPOINT"
ENV_MODEL = "LLM_MODEL"

DEFAULT_ACTOR_TEMPERATURE = 0.4
DEFAULT_CRITIC_TEMPERATURE = 0.2

# Structural markers for the single-slot context blocks; the refinement
# loop's bounded-context property is asserted by counting these.
DOCS_HEADER = "### TOOL DOCUMENTATION"
EXAMPLES_HEADER = "### USAGE EXAMPLES"
TRAJECTORY_HEADER = "### PREVIOUS TRAJECTORY"
CRITIQUE_HEADER = "### CRITIC FEEDBACK"
REVIEW_HEADER = "### TRAJECTORY UNDER REVIEW"


class AgentError(Exception):
    """Base class for agent failures."""


class TransportError(AgentError):
    """Network/protocol failure talking to the LLM endpoint (retryable)."""


class AuthError(AgentError):
    """Endpoint rejected the credentials (not retryable)."""


class RateLimitedError(TransportError):
    """HTTP 429 (retryable)."""


class UnparseableOutputError(AgentError):
    """The model never produced a parseable document, even after reprompts."""


class ScriptedExhaustedError(AgentError):
    """A scripted agent ran out of canned responses."""


@dataclass(frozen=True)
class TokenUsage:
    prompt_tokens: int = 0
    completion_tokens: int = 0
    agent_role: str = "actor"

    def __post_init__(self):
        if self.prompt_tokens < 0 or self.completion_tokens < 0:
            raise ValueError("token counts must be non-negative")

    def __add__(self, other: "TokenUsage") -> "TokenUsage":
        role = self.agent_role if self.agent_role == other.agent_role else "total"
        return TokenUsage(
            prompt_tokens=self.prompt_tokens + other.prompt_tokens,
            completion_tokens=self.completion_tokens + other.completion_tokens,
            agent_role=role,
        )

    @property
    def total_tokens(self) -> int:
        return self.prompt_tokens + self.completion_tokens

    def to_dict(self) -> dict:
        return {
            "prompt_tokens": self.prompt_tokens,
            "completion_tokens": self.completion_tokens,
            "agent_role": self.agent_role,
        }


@dataclass(frozen=True)
class AgentConfig:
    role: str  # actor | critic
    backend: str = "llm"  # llm | rule_based | scripted
    temperature: float | None = None
    model_id: str = ""
    endpoint: str = ""
    max_output_tokens: int = 4096
    timeout_seconds: float = 60.0

    def __post_init__(self):
        if self.role not in ("actor", "critic"):
            raise ValueError(f"role must be actor or critic, got {self.role!r}")
        if self.backend not in ("llm", "rule_based", "scripted"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.backend == "rule_based" and self.role != "critic":
            raise ValueError("rule_based backend is only valid for the critic role")
        if self.temperature is None:
            default = DEFAULT_ACTOR_TEMPERATURE if self.role == "actor" else DEFAULT_CRITIC_TEMPERATURE
            object.__setattr__(self, "temperature", default)
        if not (0.0 <= self.temperature <= 1.0):
            raise ValueError(f"temperature {self.temperature} not in [0,1]")
        if self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be positive")

    @classmethod
    def from_env(cls, role: str) -> "AgentConfig":
        return cls(
            role=role,
            backend="llm",
            model_id=os.environ.get(ENV_MODEL, ""),
            endpoint=os.environ.get(ENV_ENDPOINT, ""),
        )


# ---------------------------------------------------------------------------
# Prompt assembly


def _load_template(name: str) -> str:
    return resources.files("tilesmith").joinpath(f"prompts/{name}").read_text("utf-8")


def _fill(template: str, slots: dict[str, str]) -> str:
    out = template
    for key, value in slots.items():
        out = out.replace("{{" + key + "}}", value)
    # Collapse the blank runs left by empty optional blocks.
    while "\n\n\n" in out:
        out = out.replace("\n\n\n", "\n\n")
    return out


def build_actor_prompt(
    user_prompt: str,
    docs: str,
    examples: str,
    previous: Trajectory | None = None,
    feedback: Critique | None = None,
) -> str:
    """Assemble the actor's full prompt from the template and one-slot blocks."""
    slots = {
        "docs": f"{DOCS_HEADER}\n{docs}" if docs else "",
        "examples": f"{EXAMPLES_HEADER}\n{examples}" if examples else "",
        "user_prompt": user_prompt,
        "previous_trajectory": (
            f"{TRAJECTORY_HEADER} (revision {previous.revision})\n{render_trajectory(previous)}"
            if previous is not None
            else ""
        ),
        "critique": (
            f"{CRITIQUE_HEADER}\n{render_critique(feedback)}\n"
            "Revise the trajectory to resolve every blocking issue above."
            if feedback is not None
            else ""
        ),
    }
    return _fill(_load_template("actor.txt"), slots)


def build_critic_prompt(user_prompt: str, docs: str, examples: str, trajectory: Trajectory) -> str:
    slots = {
        "docs": f"{DOCS_HEADER}\n{docs}" if docs else "",
        "examples": f"{EXAMPLES_HEADER}\n{examples}" if examples else "",
        "user_prompt": user_prompt,
        "previous_trajectory": f"{REVIEW_HEADER} (revision {trajectory.revision})\n"
        + render_trajectory(trajectory),
    }
    return _fill(_load_template("critic.txt"), slots)


# ---------------------------------------------------------------------------
# Chat-completions transport


def llm_chat(
    messages: list[dict],
    config: AgentConfig,
    *,
    max_attempts: int = 3,
    backoff_base: float = 1.0,
    sleep=time.sleep,
) -> tuple[str, TokenUsage]:
    """Single chat-completions request with retry/backoff.

    Retries transport failures, timeouts, 429 and 5xx up to `max_attempts`
    times with exponential backoff starting at `backoff_base` seconds.
    Auth failures (401/403) are terminal.  Returns the assistant text and
    the usage the endpoint reported.
    """
    if not config.endpoint:
        raise TransportError(f"no endpoint configured (set {ENV_ENDPOINT})")
    body = {
        "model": config.model_id,
        "messages": messages,
        "temperature": config.temperature,
        "max_tokens": config.max_output_tokens,
    }
    headers = {"Content-Type": "application/json"}
    api_key = os.environ.get(ENV_API_KEY)
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"

    last_error: Exception | None = None
    for attempt in range(max_attempts):
        if attempt:
            delay = backoff_base * (2 ** (attempt - 1))
            log.info("retrying llm call in %.2fs (attempt %d/%d)", delay, attempt + 1, max_attempts)
            sleep(delay)
        log.debug(
            "llm request attempt=%d endpoint=%s body=%s",
            attempt + 1,
            config.endpoint,
            json.dumps({**body, "messages": f"<{len(messages)} messages>"}),
        )
        try:
            response = httpx.post(
                config.endpoint, json=body, headers=headers, timeout=config.timeout_seconds
            )
        except httpx.TimeoutException as e:
            last_error = TransportError(f"timeout after {config.timeout_seconds}s: {e}")
            continue
        except httpx.HTTPError as e:
            last_error = TransportError(str(e))
            continue

        log.debug("llm response status=%d bytes=%d", response.status_code, len(response.content))
        if response.status_code in (401, 403):
            raise AuthError(f"endpoint rejected credentials (HTTP {response.status_code})")
        if response.status_code == 429:
            last_error = RateLimitedError("rate limited (HTTP 429)")
            continue
        if response.status_code >= 500:
            last_error = TransportError(f"server error (HTTP {response.status_code})")
            continue
        if response.status_code != 200:
            raise TransportError(f"unexpected HTTP {response.status_code}: {response.text[:200]}")

        try:
            payload = response.json()
            content = payload["choices"][0]["message"]["content"]
        except (ValueError, LookupError, TypeError) as e:
            raise TransportError(f"malformed completion payload: {e}") from e
        raw_usage = payload.get("usage") or {}
        usage = TokenUsage(
            prompt_tokens=int(raw_usage.get("prompt_tokens", 0)),
            completion_tokens=int(raw_usage.get("completion_tokens", 0)),
            agent_role=config.role,
        )
        return content, usage

    raise last_error if last_error is not None else TransportError("llm call failed")


# ---------------------------------------------------------------------------
# Actors


class ScriptedActor:
    """Replays a configured sequence of trajectories (one per call)."""

    def __init__(self, plans, usages=None):
        self._plans = [self._coerce(p) for p in plans]
        self._usages = list(usages) if usages is not None else None
        self._calls = 0

    @staticmethod
    def _coerce(plan) -> Trajectory:
        if isinstance(plan, Trajectory):
            return plan
        if isinstance(plan, dict):
            return parse_trajectory(json.dumps(plan))
        return parse_trajectory(plan)

    def propose(self, user_prompt, docs, examples, feedback=None, previous=None):
        if feedback is not None and previous is None:
            raise ValueError("feedback without a previous trajectory")
        if self._calls >= len(self._plans):
            raise ScriptedExhaustedError(
                f"scripted actor exhausted after {len(self._plans)} plan(s)"
            )
        plan = self._plans[self._calls]
        usage = (
            self._usages[self._calls]
            if self._usages is not None and self._calls < len(self._usages)
            else TokenUsage(agent_role="actor")
        )
        self._calls += 1
        revision = previous.revision + 1 if previous is not None else 0
        return plan.with_revision(revision), usage


class LLMActor:
    """Proposes trajectories through a chat-completions endpoint.

    Parse failures are reprompted with the parser's complaint up to
    `parse_retries` times before giving up.
    """

    def __init__(self, config: AgentConfig, *, parse_retries: int = 2, chat=llm_chat):
        if config.role != "actor":
            raise ValueError("LLMActor needs an actor-role config")
        self.config = config
        self.parse_retries = parse_retries
        self._chat = chat

    def propose(self, user_prompt, docs, examples, feedback=None, previous=None):
        if feedback is not None and previous is None:
            raise ValueError("feedback without a previous trajectory")
        prompt = build_actor_prompt(user_prompt, docs, examples, previous, feedback)
        messages = [{"role": "user", "content": prompt}]
        usage = TokenUsage(agent_role="actor")
        last_error: ParseError | None = None
        for _ in range(self.parse_retries + 1):
            text, call_usage = self._chat(messages, self.config)
            usage = usage + call_usage
            try:
                trajectory = parse_trajectory(text)
            except ParseError as e:
                last_error = e
                log.warning("actor output failed to parse: %s", e)
                messages = messages + [
                    {"role": "assistant", "content": text},
                    {
                        "role": "user",
                        "content": f"Your output could not be used: {e}. "
                        "Respond with only the corrected JSON object.",
                    },
                ]
                continue
            revision = previous.revision + 1 if previous is not None else 0
            return trajectory.with_revision(revision), usage
        raise UnparseableOutputError(f"actor output unparseable after retries: {last_error}")


# ---------------------------------------------------------------------------
# Critics


class RuleBasedCritic:
    """Deterministic static verifier over the registry.

    Covers tool selection, parameter correctness, and logic & sequence;
    goal alignment requires reading intent and is intentionally NOT checked
    here — pretending otherwise would be false confidence.  Token usage is
    always zero.
    """

    def __init__(self, registry: Registry):
        self.registry = registry

    def review(self, trajectory: Trajectory, docs=None, examples=None, user_prompt=None):
        issues = validate_plan(trajectory, self.registry)
        if issues:
            critique = Critique(decision="revise", blocking_issues=tuple(issues))
        else:
            critique = Critique.approval()
        return critique, TokenUsage(agent_role="critic")


class ScriptedCritic:
    """Replays a configured sequence of critiques (one per call)."""

    def __init__(self, critiques, usages=None):
        self._critiques = [self._coerce(c) for c in critiques]
        self._usages = list(usages) if usages is not None else None
        self._calls = 0

    @staticmethod
    def _coerce(c) -> Critique:
        if isinstance(c, Critique):
            return c
        if isinstance(c, dict):
            return parse_critique(json.dumps(c))
        return parse_critique(c)

    def review(self, trajectory, docs=None, examples=None, user_prompt=None):
        if self._calls >= len(self._critiques):
            raise ScriptedExhaustedError(
                f"scripted critic exhausted after {len(self._critiques)} critique(s)"
            )
        critique = self._critiques[self._calls]
        usage = (
            self._usages[self._calls]
            if self._usages is not None and self._calls < len(self._usages)
            else TokenUsage(agent_role="critic")
        )
        self._calls += 1
        return critique, usage


class LLMCritic:
    def __init__(self, config: AgentConfig, *, parse_retries: int = 2, chat=llm_chat):
        if config.role != "critic":
            raise ValueError("LLMCritic needs a critic-role config")
        self.config = config
        self.parse_retries = parse_retries
        self._chat = chat

    def review(self, trajectory, docs, examples, user_prompt):
        prompt = build_critic_prompt(user_prompt, docs, examples, trajectory)
        messages = [{"role": "user", "content": prompt}]
        usage = TokenUsage(agent_role="critic")
        last_error: ParseError | None = None
        for _ in range(self.parse_retries + 1):
            text, call_usage = self._chat(messages, self.config)
            usage = usage + call_usage
            try:
                return parse_critique(text), usage
            except ParseError as e:
                last_error = e
                log.warning("critic output failed to parse: %s", e)
                messages = messages + [
                    {"role": "assistant", "content": text},
                    {
                        "role": "user",
                        "content": f"Your output could not be used: {e}. "
                        "Respond with only the corrected JSON object.",
                    },
                ]
        raise UnparseableOutputError(f"critic output unparseable after retries: {last_error}")


# ---------------------------------------------------------------------------
# Static plan verification (the rule critic's brain)


def validate_plan(trajectory: Trajectory, registry: Registry) -> list[BlockingIssue]:
    """Mechanical checks per step, in review-framework order.

    tool_selection: the tool exists.  parameter_correctness: arguments pass
    the registry's constraint checks.  logic_sequence: "@" references
    resolve to earlier bindings of the kind the tool consumes, composers do
    not precede every generator, and scatter steps reference tier names an
    earlier build step actually emits (with matching grid dimensions when
    statically known).
    """
    issues: list[BlockingIssue] = []
    bindings: dict[str, str] = {}  # binding -> produced kind
    binding_dims: dict[str, tuple[int, int] | None] = {}
    tier_dims: dict[str, tuple[int, int] | None] = {}  # tier name -> dims
    first_generator = None
    for i, step in enumerate(trajectory.tool_plan):
        tool = registry.get(step.tool_name)
        if tool is not None and tool.category == "generator" and first_generator is None:
            first_generator = i

    for i, step in enumerate(trajectory.tool_plan):
        tool = registry.get(step.tool_name)
        if tool is None:
            issues.append(
                BlockingIssue(
                    dimension="tool_selection",
                    step_index=i,
                    description=f"unknown tool {step.tool_name!r}",
                    correction_suggestion="use one of: " + ", ".join(registry.names()),
                )
            )
            continue

        for arg_issue in validate_arguments(tool, step.arguments):
            issues.append(
                BlockingIssue(
                    dimension="parameter_correctness",
                    step_index=i,
                    description=f"{arg_issue.parameter}: {arg_issue.issue} — {arg_issue.constraint}",
                )
            )

        input_names = {spec.name: kind for spec, kind in zip(tool.input_parameters(), tool.consumes)}
        for name, value in step.arguments.items():
            is_ref = isinstance(value, str) and value.startswith(BINDING_PREFIX)
            if name in input_names:
                if not is_ref:
                    if isinstance(value, str):
                        issues.append(
                            BlockingIssue(
                                dimension="logic_sequence",
                                step_index=i,
                                description=f"{name}: step inputs must reference an earlier "
                                f"output as \"@binding\", got {value!r}",
                            )
                        )
                    continue
                ref = value[len(BINDING_PREFIX):]
                if ref not in bindings:
                    issues.append(
                        BlockingIssue(
                            dimension="logic_sequence",
                            step_index=i,
                            description=f"{name}: binding {ref!r} is not produced by an earlier step",
                        )
                    )
                elif bindings[ref] != input_names[name]:
                    issues.append(
                        BlockingIssue(
                            dimension="logic_sequence",
                            step_index=i,
                            description=f"{name}: binding {ref!r} holds {bindings[ref]}, "
                            f"but this input needs {input_names[name]}",
                        )
                    )
            elif is_ref:
                issues.append(
                    BlockingIssue(
                        dimension="logic_sequence",
                        step_index=i,
                        description=f"{name}: parameter does not accept a step output reference",
                    )
                )

        if tool.category == "composer" and (first_generator is None or i < first_generator):
            issues.append(
                BlockingIssue(
                    dimension="logic_sequence",
                    step_index=i,
                    description="composer step appears before any generator step",
                )
            )

        step_dims = _infer_dims(step, tool, binding_dims)

        if step.tool_name == "build_height_layers":
            tiers = step.arguments.get("tiers")
            if isinstance(tiers, int) and not isinstance(tiers, bool) and 1 <= tiers <= 4096:
                for k in range(tiers):
                    name = f"tier_{k}"
                    if name in tier_dims:
                        issues.append(
                            BlockingIssue(
                                dimension="logic_sequence",
                                step_index=i,
                                description=f"layer {name!r} is already emitted by an earlier step",
                            )
                        )
                    tier_dims[name] = step_dims

        if step.tool_name == "scatter":
            layer_name = step.arguments.get("layer_name")
            if isinstance(layer_name, str) and not layer_name.startswith(BINDING_PREFIX):
                if layer_name not in tier_dims:
                    issues.append(
                        BlockingIssue(
                            dimension="logic_sequence",
                            step_index=i,
                            description=f"layer_name {layer_name!r} is not emitted by any "
                            "earlier build_height_layers step",
                            correction_suggestion="build the layers first, then scatter onto them",
                        )
                    )
                else:
                    expected = tier_dims[layer_name]
                    if expected is not None and step_dims is not None and expected != step_dims:
                        issues.append(
                            BlockingIssue(
                                dimension="logic_sequence",
                                step_index=i,
                                description=f"target grid is {step_dims[0]}x{step_dims[1]} but layer "
                                f"{layer_name!r} is {expected[0]}x{expected[1]}",
                            )
                        )

        if step.output_binding is not None:
            bindings[step.output_binding] = tool.produces
            binding_dims[step.output_binding] = step_dims

    return issues


def _infer_dims(step, tool, binding_dims) -> tuple[int, int] | None:
    """Static grid dimensions of a step's output, when derivable."""
    if tool.category == "generator":
        w, h = step.arguments.get("width"), step.arguments.get("height")
        if isinstance(w, int) and isinstance(h, int) and not isinstance(w, bool) and not isinstance(h, bool):
            return (w, h)
        return None
    # Modifiers and composers preserve the dimensions of their first input.
    for spec in tool.input_parameters():
        value = step.arguments.get(spec.name)
        if isinstance(value, str) and value.startswith(BINDING_PREFIX):
            return binding_dims.get(value[len(BINDING_PREFIX):])
    return None


# ---------------------------------------------------------------------------
# Factories


def make_actor(config: AgentConfig, *, scripted_plans=None, scripted_usages=None, chat=llm_chat):
    if config.backend == "scripted":
        return ScriptedActor(scripted_plans or [], usages=scripted_usages)
    if config.backend == "llm":
        return LLMActor(config, chat=chat)
    raise ValueError(f"no actor backend {config.backend!r}")


def make_critic(
    config: AgentConfig,
    registry: Registry | None = None,
    *,
    scripted_critiques=None,
    scripted_usages=None,
    chat=llm_chat,
):
    if config.backend == "rule_based":
        if registry is None:
            raise ValueError("rule_based critic needs a registry")
        return RuleBasedCritic(registry)
    if config.backend == "scripted":
        return ScriptedCritic(scripted_critiques or [], usages=scripted_usages)
    if config.backend == "llm":
        return LLMCritic(config, chat=chat)
    raise ValueError(f"no critic backend {config.backend!r}")
