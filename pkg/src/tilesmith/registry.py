"""Machine-readable catalog of engine tools.

The registry is a versioned JSON document (see docs/registry-schema.md)
listing every generator/modifier/composer with parameter constraints and
validated usage examples.  Its rendered form is injected verbatim into
agent prompts, so swapping the file retargets the agents to a different
tool surface without code changes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

REGISTRY_VERSION = 1

PARAMETER_KINDS = ("integer", "real", "boolean", "string", "enum")
TOOL_CATEGORIES = ("generator", "modifier", "composer")
OUTPUT_KINDS = ("grid", "layers", "placements")

# Argument values starting with this prefix reference an earlier step's output.
BINDING_PREFIX = "@"


class RegistryParseError(ValueError):
    """Document is not well-formed registry JSON (position-annotated when possible)."""


class RegistryInvariantError(ValueError):
    """A structural invariant failed; message names the offending tool/parameter."""


@dataclass(frozen=True)
class ParameterSpec:
    name: str
    kind: str
    required: bool = False
    range: tuple[float, float] | None = None
    allowed_values: tuple[str, ...] | None = None
    default: Any = None
    description: str = ""

    def validate(self, tool_name: str) -> None:
        where = f"tool {tool_name!r} parameter {self.name!r}"
        if not self.name:
            raise RegistryInvariantError(f"tool {tool_name!r}: parameter with empty name")
        if self.kind not in PARAMETER_KINDS:
            raise RegistryInvariantError(f"{where}: unknown kind {self.kind!r}")
        if self.range is not None and self.allowed_values is not None:
            raise RegistryInvariantError(f"{where}: range and allowed_values are mutually exclusive")
        if self.range is not None:
            if self.kind not in ("integer", "real"):
                raise RegistryInvariantError(f"{where}: range only applies to numeric kinds")
            lo, hi = self.range
            if lo > hi:
                raise RegistryInvariantError(f"{where}: range min {lo} > max {hi}")
        if self.allowed_values is not None and self.kind != "enum":
            raise RegistryInvariantError(f"{where}: allowed_values only applies to enum kind")
        if self.kind == "enum" and not self.allowed_values:
            raise RegistryInvariantError(f"{where}: enum kind needs allowed_values")
        if self.required and self.default is not None:
            raise RegistryInvariantError(f"{where}: required parameters cannot carry a default")
        if self.default is not None and self.check_value(self.default) is not None:
            raise RegistryInvariantError(f"{where}: default {self.default!r} violates its own constraint")

    def check_value(self, value: Any) -> tuple[str, str] | None:
        """None when the value satisfies kind/range/allowed_values, else
        (issue kind, violated constraint)."""
        if self.kind == "integer":
            if isinstance(value, bool) or not isinstance(value, int):
                return "type-mismatch", f"expected integer, got {type(value).__name__}"
        elif self.kind == "real":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                return "type-mismatch", f"expected real, got {type(value).__name__}"
        elif self.kind == "boolean":
            if not isinstance(value, bool):
                return "type-mismatch", f"expected boolean, got {type(value).__name__}"
        elif self.kind == "string":
            if not isinstance(value, str):
                return "type-mismatch", f"expected string, got {type(value).__name__}"
        elif self.kind == "enum":
            if value not in (self.allowed_values or ()):
                return "out-of-range", f"expected one of {list(self.allowed_values or ())}, got {value!r}"
        if self.range is not None and isinstance(value, (int, float)) and not isinstance(value, bool):
            lo, hi = self.range
            if not (lo <= value <= hi):
                return "out-of-range", f"value {value} outside [{lo}, {hi}]"
        return None


@dataclass(frozen=True)
class ExampleStep:
    tool_name: str
    arguments: dict
    binding: str | None = None


@dataclass(frozen=True)
class UsageExample:
    title: str
    prompt_fragment: str
    steps: tuple[ExampleStep, ...]
    note: str = ""

    def trajectory_doc(self) -> dict:
        """The example expressed as a plan document the parser accepts."""
        return {
            "trajectory_summary": self.title,
            "tool_plan": [
                {
                    "objective": f"{self.title}, step {i}",
                    "tool_name": s.tool_name,
                    "arguments": dict(s.arguments),
                    "expected_result": "matches the documented behavior",
                    **({"output_binding": s.binding} if s.binding else {}),
                }
                for i, s in enumerate(self.steps)
            ],
            "risks": [],
            "revision": 0,
        }


@dataclass(frozen=True)
class ToolDescriptor:
    tool_name: str
    category: str
    description: str
    produces: str
    consumes: tuple[str, ...] = ()
    parameters: tuple[ParameterSpec, ...] = ()
    examples: tuple[UsageExample, ...] = ()

    def validate(self) -> None:
        if not self.tool_name:
            raise RegistryInvariantError("tool with empty tool_name")
        if self.category not in TOOL_CATEGORIES:
            raise RegistryInvariantError(f"tool {self.tool_name!r}: unknown category {self.category!r}")
        if self.produces not in OUTPUT_KINDS:
            raise RegistryInvariantError(f"tool {self.tool_name!r}: unknown produces {self.produces!r}")
        names = [p.name for p in self.parameters]
        dupes = {n for n in names if names.count(n) > 1}
        if dupes:
            raise RegistryInvariantError(f"tool {self.tool_name!r}: duplicate parameters {sorted(dupes)}")
        for p in self.parameters:
            p.validate(self.tool_name)
        for kind in self.consumes:
            if kind not in OUTPUT_KINDS:
                raise RegistryInvariantError(f"tool {self.tool_name!r}: unknown consumes kind {kind!r}")
        # The first len(consumes) parameters are the step-input slots; each
        # receives an "@binding" reference to an earlier step's output.
        if len(self.parameters) < len(self.consumes):
            raise RegistryInvariantError(
                f"tool {self.tool_name!r}: fewer parameters than consumed inputs"
            )
        for spec in self.parameters[: len(self.consumes)]:
            if spec.kind != "string" or not spec.required:
                raise RegistryInvariantError(
                    f"tool {self.tool_name!r}: input parameter {spec.name!r} must be a required string"
                )

    def input_parameters(self) -> tuple[ParameterSpec, ...]:
        return self.parameters[: len(self.consumes)]

    def parameter(self, name: str) -> ParameterSpec | None:
        for p in self.parameters:
            if p.name == name:
                return p
        return None


@dataclass(frozen=True)
class ArgIssue:
    parameter: str
    issue: str  # missing | unknown | type-mismatch | out-of-range
    constraint: str

    def __str__(self):
        return f"{self.parameter}: {self.issue} ({self.constraint})"


class Registry:
    """Immutable tool catalog; freely shareable once loaded."""

    def __init__(self, tools: list[ToolDescriptor], version: int = REGISTRY_VERSION):
        self.version = version
        self.tools = {t.tool_name: t for t in tools}

    def get(self, tool_name: str) -> ToolDescriptor | None:
        return self.tools.get(tool_name)

    def names(self) -> list[str]:
        return sorted(self.tools)

    def __len__(self):
        return len(self.tools)

    def __iter__(self):
        return iter(self.tools.values())


def validate_arguments(tool: ToolDescriptor, args: dict) -> list[ArgIssue]:
    """Mechanical argument check: presence, no unknowns, kind/range/enum.

    Issues are data, not exceptions; an empty list means the arguments are
    acceptable to the engine.  Binding references ("@name") are checked
    only for being strings here; whether they resolve is a plan-level
    (logic & sequence) question.
    """
    issues = []
    specs = {p.name: p for p in tool.parameters}
    for name in args:
        if name not in specs:
            issues.append(ArgIssue(name, "unknown", f"tool {tool.tool_name} has no such parameter"))
    for spec in tool.parameters:
        if spec.name not in args:
            if spec.required:
                issues.append(ArgIssue(spec.name, "missing", "required parameter absent"))
            continue
        value = args[spec.name]
        problem = spec.check_value(value)
        if problem is not None:
            issues.append(ArgIssue(spec.name, problem[0], problem[1]))
    return issues


def apply_defaults(tool: ToolDescriptor, args: dict) -> dict:
    """Provided arguments merged over declared defaults."""
    merged = {p.name: p.default for p in tool.parameters if p.default is not None}
    merged.update(args)
    return merged


# ---------------------------------------------------------------------------
# Loading / serialization


def load_registry(source: str | dict | Path) -> Registry:
    """Parse and fully validate a registry document.

    Accepts a JSON string, a parsed dict, or a path to a JSON file.  All
    structural invariants are enforced and every bundled usage example is
    re-validated against its tool, so a loaded registry never documents an
    invalid call.
    """
    if isinstance(source, Path):
        source = source.read_text(encoding="utf-8")
    if isinstance(source, str):
        try:
            doc = json.loads(source)
        except json.JSONDecodeError as e:
            raise RegistryParseError(f"line {e.lineno} column {e.colno}: {e.msg}") from e
    else:
        doc = source
    if not isinstance(doc, dict):
        raise RegistryParseError("registry document must be a JSON object")
    version = doc.get("registry_version")
    if version != REGISTRY_VERSION:
        raise RegistryParseError(f"unsupported registry_version {version!r}")
    raw_tools = doc.get("tools")
    if not isinstance(raw_tools, list):
        raise RegistryParseError("missing or non-list 'tools'")

    tools = []
    seen = set()
    for i, raw in enumerate(raw_tools):
        tool = _tool_from_dict(raw, i)
        if tool.tool_name in seen:
            raise RegistryInvariantError(f"duplicate tool_name {tool.tool_name!r}")
        seen.add(tool.tool_name)
        tool.validate()
        tools.append(tool)

    registry = Registry(tools, version=version)
    for tool in tools:
        for example in tool.examples:
            _validate_example(registry, tool, example)
    return registry


def load_registry_file(path: str | Path) -> Registry:
    return load_registry(Path(path))


def default_registry() -> Registry:
    """The registry bundled with this package (8 engine tools)."""
    text = resources.files("tilesmith").joinpath("data/registry.json").read_text("utf-8")
    return load_registry(text)


def _tool_from_dict(raw: dict, index: int) -> ToolDescriptor:
    if not isinstance(raw, dict):
        raise RegistryParseError(f"tools[{index}] is not an object")
    try:
        params = tuple(
            ParameterSpec(
                name=p["name"],
                kind=p["kind"],
                required=p.get("required", False),
                range=tuple(p["range"]) if "range" in p else None,
                allowed_values=tuple(p["allowed_values"]) if "allowed_values" in p else None,
                default=p.get("default"),
                description=p.get("description", ""),
            )
            for p in raw.get("parameters", [])
        )
        examples = tuple(
            UsageExample(
                title=e["title"],
                prompt_fragment=e.get("prompt_fragment", ""),
                steps=tuple(
                    ExampleStep(s["tool_name"], dict(s["arguments"]), s.get("binding"))
                    for s in e.get("steps", [])
                ),
                note=e.get("note", ""),
            )
            for e in raw.get("examples", [])
        )
        return ToolDescriptor(
            tool_name=raw["tool_name"],
            category=raw["category"],
            description=raw.get("description", ""),
            produces=raw["produces"],
            consumes=tuple(raw.get("consumes", [])),
            parameters=params,
            examples=examples,
        )
    except KeyError as e:
        raise RegistryParseError(f"tools[{index}]: missing field {e.args[0]!r}") from e


def _validate_example(registry: Registry, owner: ToolDescriptor, example: UsageExample) -> None:
    for step_index, step in enumerate(example.steps):
        tool = registry.get(step.tool_name)
        if tool is None:
            raise RegistryInvariantError(
                f"tool {owner.tool_name!r} example {example.title!r} step {step_index}: "
                f"unknown tool {step.tool_name!r}"
            )
        issues = validate_arguments(tool, step.arguments)
        if issues:
            raise RegistryInvariantError(
                f"tool {owner.tool_name!r} example {example.title!r} step {step_index}: "
                + "; ".join(str(i) for i in issues)
            )


def serialize_registry(registry: Registry) -> str:
    """Canonical JSON for the registry (stable key order, alphabetical tools)."""
    doc = {
        "registry_version": registry.version,
        "tools": [_tool_to_dict(registry.tools[name]) for name in registry.names()],
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _tool_to_dict(tool: ToolDescriptor) -> dict:
    out: dict = {
        "tool_name": tool.tool_name,
        "category": tool.category,
        "description": tool.description,
        "produces": tool.produces,
        "consumes": list(tool.consumes),
        "parameters": [],
        "examples": [
            {
                "title": e.title,
                "prompt_fragment": e.prompt_fragment,
                "steps": [
                    {
                        "tool_name": s.tool_name,
                        "arguments": s.arguments,
                        **({"binding": s.binding} if s.binding else {}),
                    }
                    for s in e.steps
                ],
                "note": e.note,
            }
            for e in tool.examples
        ],
    }
    for p in tool.parameters:
        pd: dict = {"name": p.name, "kind": p.kind, "required": p.required, "description": p.description}
        if p.range is not None:
            pd["range"] = list(p.range)
        if p.allowed_values is not None:
            pd["allowed_values"] = list(p.allowed_values)
        if p.default is not None:
            pd["default"] = p.default
        out["parameters"].append(pd)
    return out


# ---------------------------------------------------------------------------
# Prompt-facing rendering


def render_documentation(registry: Registry) -> str:
    """Deterministic text rendering of every tool, alphabetical by name.

    This exact text is what the agents see; both the rule critic and any
    LLM critic judge plans against it.
    """
    lines = [f"TOOL REGISTRY (version {registry.version}, {len(registry)} tools)", ""]
    for name in registry.names():
        tool = registry.tools[name]
        lines.append(f"### {tool.tool_name} [{tool.category}]")
        if tool.description:
            lines.append(tool.description)
        lines.append(f"produces: {tool.produces}")
        if tool.consumes:
            lines.append(
                "consumes: "
                + ", ".join(
                    f"{kind} via parameter '{spec.name}' (pass \"@binding\")"
                    for kind, spec in zip(tool.consumes, tool.input_parameters())
                )
            )
        lines.append("parameters:")
        for p in tool.parameters:
            bits = [p.kind]
            if p.range is not None:
                bits.append(f"range [{_fmt(p.range[0])}, {_fmt(p.range[1])}]")
            if p.allowed_values is not None:
                bits.append("one of {" + ", ".join(p.allowed_values) + "}")
            bits.append("required" if p.required else "optional")
            if p.default is not None:
                bits.append(f"default {p.default}")
            line = f"  - {p.name}: " + ", ".join(bits)
            if p.description:
                line += f" — {p.description}"
            lines.append(line)
        lines.append("")
    return "\n".join(lines)


def render_examples(registry: Registry) -> str:
    """Deterministic rendering of all bundled usage examples."""
    lines = ["VALIDATED USAGE EXAMPLES", ""]
    count = 0
    for name in registry.names():
        for e in registry.tools[name].examples:
            count += 1
            lines.append(f"Example: {e.title}")
            if e.prompt_fragment:
                lines.append(f"intent: {e.prompt_fragment}")
            for i, s in enumerate(e.steps):
                args = json.dumps(s.arguments, sort_keys=True)
                suffix = f"  -> @{s.binding}" if s.binding else ""
                lines.append(f"  step {i}: {s.tool_name} {args}{suffix}")
            if e.note:
                lines.append(f"note: {e.note}")
            lines.append("")
    if count == 0:
        lines.append("(none)")
        lines.append("")
    return "\n".join(lines)


def _fmt(x) -> str:
    if isinstance(x, float) and x.is_integer():
        return str(int(x))
    return str(x)
