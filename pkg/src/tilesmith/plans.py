"""Structured documents the two agents exchange: plans and critiques.

Agents are asked for strict JSON, but real model output arrives wrapped in
prose and code fences, so parsing first extracts the earliest decodable
JSON object and only then applies the schema.  Rendering is canonical
(sorted keys, compact separators): parse(render(x)) == x for every valid
value, and semantically equal values render byte-identically.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass

log = logging.getLogger(__name__)

ISSUE_DIMENSIONS = ("tool_selection", "parameter_correctness", "logic_sequence", "goal_alignment")
DECISIONS = ("approve", "revise")

BINDING_PREFIX = "@"

_SCALAR_TYPES = (str, int, float, bool)


class ParseError(ValueError):
    """Base class for document parsing failures."""


class NoJsonFound(ParseError):
    def __init__(self):
        super().__init__("no JSON object found in text")


class SchemaViolation(ParseError):
    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")


class DataflowViolation(ParseError):
    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")


@dataclass(frozen=True)
class ToolStep:
    objective: str
    tool_name: str
    arguments: dict
    expected_result: str
    output_binding: str | None = None

    def binding_references(self) -> list[tuple[str, str]]:
        """(argument name, referenced binding) for every @-valued argument."""
        refs = []
        for name, value in self.arguments.items():
            if isinstance(value, str) and value.startswith(BINDING_PREFIX):
                refs.append((name, value[len(BINDING_PREFIX):]))
        return refs


@dataclass(frozen=True)
class Trajectory:
    trajectory_summary: str
    tool_plan: tuple[ToolStep, ...]
    risks: tuple[str, ...] = ()
    revision: int = 0

    def __post_init__(self):
        object.__setattr__(self, "tool_plan", tuple(self.tool_plan))
        object.__setattr__(self, "risks", tuple(self.risks))

    def with_revision(self, revision: int) -> "Trajectory":
        return Trajectory(self.trajectory_summary, self.tool_plan, self.risks, revision)

    def to_dict(self) -> dict:
        return {
            "trajectory_summary": self.trajectory_summary,
            "tool_plan": [
                {
                    "objective": s.objective,
                    "tool_name": s.tool_name,
                    "arguments": s.arguments,
                    "expected_result": s.expected_result,
                    **({"output_binding": s.output_binding} if s.output_binding else {}),
                }
                for s in self.tool_plan
            ],
            "risks": list(self.risks),
            "revision": self.revision,
        }


@dataclass(frozen=True)
class BlockingIssue:
    dimension: str
    description: str
    step_index: int | None = None
    correction_suggestion: str | None = None

    def sort_key(self):
        return (
            self.step_index is None,
            self.step_index if self.step_index is not None else 0,
            self.dimension,
            self.description,
        )


@dataclass(frozen=True)
class Critique:
    decision: str
    blocking_issues: tuple[BlockingIssue, ...] = ()
    missing_information: tuple[str, ...] = ()

    def __post_init__(self):
        # Canonical issue order (step_index ascending, plan-level issues last)
        # so equal critiques always render identically.
        ordered = tuple(sorted(self.blocking_issues, key=BlockingIssue.sort_key))
        object.__setattr__(self, "blocking_issues", ordered)
        object.__setattr__(self, "missing_information", tuple(self.missing_information))
        if self.decision not in DECISIONS:
            raise ValueError(f"decision must be one of {DECISIONS}, got {self.decision!r}")
        if self.decision == "approve" and self.blocking_issues:
            raise ValueError("an approving critique cannot carry blocking issues")
        if self.decision == "revise" and not self.blocking_issues and not self.missing_information:
            raise ValueError("a revise critique must carry blocking issues or missing information")

    @classmethod
    def approval(cls) -> "Critique":
        return cls(decision="approve")

    def to_dict(self) -> dict:
        return {
            "decision": self.decision,
            "blocking_issues": [
                {
                    "dimension": i.dimension,
                    "description": i.description,
                    **({"step_index": i.step_index} if i.step_index is not None else {}),
                    **(
                        {"correction_suggestion": i.correction_suggestion}
                        if i.correction_suggestion is not None
                        else {}
                    ),
                }
                for i in self.blocking_issues
            ],
            "missing_information": list(self.missing_information),
        }


# ---------------------------------------------------------------------------
# Extraction and validation


def extract_json_object(raw: str) -> dict:
    """First decodable JSON object in `raw`, fences and chatter tolerated."""
    decoder = json.JSONDecoder()
    pos = raw.find("{")
    while pos != -1:
        try:
            value, _ = decoder.raw_decode(raw, pos)
        except json.JSONDecodeError:
            pos = raw.find("{", pos + 1)
            continue
        if isinstance(value, dict):
            return value
        pos = raw.find("{", pos + 1)
    raise NoJsonFound()


def _need(doc: dict, key: str, path: str):
    if key not in doc:
        raise SchemaViolation(f"{path}.{key}", "missing required field")
    return doc[key]


def _nonempty_str(value, path: str) -> str:
    if not isinstance(value, str):
        raise SchemaViolation(path, f"expected string, got {type(value).__name__}")
    if not value.strip():
        raise SchemaViolation(path, "must be non-empty")
    return value


def _string_list(value, path: str) -> tuple[str, ...]:
    if not isinstance(value, list):
        raise SchemaViolation(path, f"expected list, got {type(value).__name__}")
    out = []
    for i, item in enumerate(value):
        if not isinstance(item, str):
            raise SchemaViolation(f"{path}[{i}]", f"expected string, got {type(item).__name__}")
        out.append(item)
    return tuple(out)


def parse_trajectory(raw: str) -> Trajectory:
    """Parse and validate an actor plan from raw (possibly noisy) text.

    Raises NoJsonFound, SchemaViolation (with a $.field path) or
    DataflowViolation (a binding referenced before it is produced).
    """
    doc = extract_json_object(raw)
    summary = _nonempty_str(_need(doc, "trajectory_summary", "$"), "$.trajectory_summary")

    raw_plan = _need(doc, "tool_plan", "$")
    if not isinstance(raw_plan, list):
        raise SchemaViolation("$.tool_plan", f"expected list, got {type(raw_plan).__name__}")
    if not raw_plan:
        raise SchemaViolation("$.tool_plan", "must contain at least one step")

    steps = []
    for i, raw_step in enumerate(raw_plan):
        path = f"$.tool_plan[{i}]"
        if not isinstance(raw_step, dict):
            raise SchemaViolation(path, f"expected object, got {type(raw_step).__name__}")
        objective = _nonempty_str(_need(raw_step, "objective", path), f"{path}.objective")
        tool_name = _nonempty_str(_need(raw_step, "tool_name", path), f"{path}.tool_name")
        expected = _nonempty_str(_need(raw_step, "expected_result", path), f"{path}.expected_result")
        raw_args = _need(raw_step, "arguments", path)
        if not isinstance(raw_args, dict):
            raise SchemaViolation(f"{path}.arguments", f"expected object, got {type(raw_args).__name__}")
        for name, value in raw_args.items():
            if not isinstance(value, _SCALAR_TYPES):
                raise SchemaViolation(
                    f"{path}.arguments.{name}",
                    f"argument values must be scalars, got {type(value).__name__}",
                )
        binding = raw_step.get("output_binding")
        if binding is not None:
            binding = _nonempty_str(binding, f"{path}.output_binding")
        steps.append(
            ToolStep(
                objective=objective,
                tool_name=tool_name,
                arguments=dict(raw_args),
                expected_result=expected,
                output_binding=binding,
            )
        )

    risks = _string_list(doc.get("risks", []), "$.risks")
    revision = doc.get("revision", 0)
    if not isinstance(revision, int) or isinstance(revision, bool) or revision < 0:
        raise SchemaViolation("$.revision", f"expected non-negative integer, got {revision!r}")

    _check_dataflow(steps)
    return Trajectory(
        trajectory_summary=summary, tool_plan=tuple(steps), risks=risks, revision=revision
    )


def _check_dataflow(steps: list[ToolStep]) -> None:
    seen: set[str] = set()
    bindings: list[str] = []
    for i, step in enumerate(steps):
        for arg_name, ref in step.binding_references():
            if ref not in seen:
                raise DataflowViolation(
                    f"$.tool_plan[{i}].arguments.{arg_name}",
                    f"binding {ref!r} is not produced by any earlier step",
                )
        if step.output_binding is not None:
            if step.output_binding in seen:
                raise DataflowViolation(
                    f"$.tool_plan[{i}].output_binding",
                    f"binding {step.output_binding!r} already defined",
                )
            seen.add(step.output_binding)
            bindings.append(step.output_binding)


def parse_critique(raw: str) -> Critique:
    """Parse and validate a critic verdict from raw text.

    An "approve" carrying blocking issues is contradictory; it is repaired
    conservatively to "revise" (and logged) rather than rejected, since the
    issues are the part worth keeping.
    """
    doc = extract_json_object(raw)
    decision = _need(doc, "decision", "$")
    if decision not in DECISIONS:
        raise SchemaViolation("$.decision", f"expected one of {list(DECISIONS)}, got {decision!r}")

    raw_issues = doc.get("blocking_issues", [])
    if not isinstance(raw_issues, list):
        raise SchemaViolation("$.blocking_issues", f"expected list, got {type(raw_issues).__name__}")
    issues = []
    for i, raw_issue in enumerate(raw_issues):
        path = f"$.blocking_issues[{i}]"
        if not isinstance(raw_issue, dict):
            raise SchemaViolation(path, f"expected object, got {type(raw_issue).__name__}")
        dimension = _need(raw_issue, "dimension", path)
        if dimension not in ISSUE_DIMENSIONS:
            raise SchemaViolation(
                f"{path}.dimension", f"expected one of {list(ISSUE_DIMENSIONS)}, got {dimension!r}"
            )
        description = _nonempty_str(_need(raw_issue, "description", path), f"{path}.description")
        step_index = raw_issue.get("step_index")
        if step_index is not None:
            if not isinstance(step_index, int) or isinstance(step_index, bool) or step_index < 0:
                raise SchemaViolation(
                    f"{path}.step_index", f"expected non-negative integer, got {step_index!r}"
                )
        suggestion = raw_issue.get("correction_suggestion")
        if suggestion is not None and not isinstance(suggestion, str):
            raise SchemaViolation(
                f"{path}.correction_suggestion", f"expected string, got {type(suggestion).__name__}"
            )
        issues.append(
            BlockingIssue(
                dimension=dimension,
                description=description,
                step_index=step_index,
                correction_suggestion=suggestion,
            )
        )

    missing = _string_list(doc.get("missing_information", []), "$.missing_information")

    if decision == "approve" and issues:
        log.warning(
            "critique said 'approve' but carries %d blocking issue(s); normalizing to 'revise'",
            len(issues),
        )
        decision = "revise"
    if decision == "revise" and not issues and not missing:
        raise SchemaViolation("$.decision", "revise requires blocking_issues or missing_information")
    return Critique(decision=decision, blocking_issues=tuple(issues), missing_information=missing)


# ---------------------------------------------------------------------------
# Canonical rendering


def render_trajectory(t: Trajectory) -> str:
    return json.dumps(t.to_dict(), sort_keys=True, separators=(",", ":"))


def render_critique(c: Critique) -> str:
    return json.dumps(c.to_dict(), sort_keys=True, separators=(",", ":"))


def render_for_context(value) -> str:
    """Canonical compact rendering of either document type."""
    if isinstance(value, Trajectory):
        return render_trajectory(value)
    if isinstance(value, Critique):
        return render_critique(value)
    raise TypeError(f"cannot render {type(value).__name__}")


def trajectory_digest(t: Trajectory) -> str:
    """SHA-256 of the canonical rendering; the trace's stable plan identity."""
    return hashlib.sha256(render_trajectory(t).encode("utf-8")).hexdigest()
