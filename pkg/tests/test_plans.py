import json
import logging
import random

import pytest

from tilesmith.plans import (
    Critique,
    DataflowViolation,
    NoJsonFound,
    SchemaViolation,
    parse_critique,
    parse_trajectory,
    render_critique,
    render_for_context,
    render_trajectory,
    trajectory_digest,
)

MINIMAL = {
    "trajectory_summary": "one step",
    "tool_plan": [
        {
            "objective": "do the thing",
            "tool_name": "gen_maze",
            "arguments": {"width": 9, "height": 9},
            "expected_result": "a maze",
        }
    ],
}


class TestTrajectoryParsing:
    def test_minimal_document(self):
        t = parse_trajectory(json.dumps(MINIMAL))
        assert t.revision == 0
        assert t.risks == ()
        assert len(t.tool_plan) == 1
        assert t.tool_plan[0].tool_name == "gen_maze"

    def test_missing_summary_path(self):
        doc = dict(MINIMAL)
        del doc["trajectory_summary"]
        with pytest.raises(SchemaViolation) as err:
            parse_trajectory(json.dumps(doc))
        assert err.value.path == "$.trajectory_summary"

    def test_fenced_output_parses_identically(self):
        bare = parse_trajectory(json.dumps(MINIMAL))
        noisy = (
            "Sure! Here is the plan you asked for:\n```json\n"
            + json.dumps(MINIMAL, indent=2)
            + "\n```\nLet me know if you want changes."
        )
        assert parse_trajectory(noisy) == bare

    def test_prose_with_braces_before_json(self):
        noisy = "I considered {a: 1 style pseudo code} first.\n" + json.dumps(MINIMAL)
        assert parse_trajectory(noisy) == parse_trajectory(json.dumps(MINIMAL))

    def test_no_json_found(self):
        with pytest.raises(NoJsonFound):
            parse_trajectory("no structured output at all")

    def test_empty_tool_plan_rejected(self):
        doc = dict(MINIMAL, tool_plan=[])
        with pytest.raises(SchemaViolation) as err:
            parse_trajectory(json.dumps(doc))
        assert err.value.path == "$.tool_plan"

    @pytest.mark.parametrize(
        "field,value,path",
        [
            ("objective", "", "$.tool_plan[0].objective"),
            ("tool_name", "", "$.tool_plan[0].tool_name"),
            ("expected_result", "  ", "$.tool_plan[0].expected_result"),
            ("arguments", ["not", "a", "dict"], "$.tool_plan[0].arguments"),
        ],
    )
    def test_step_field_violations(self, field, value, path):
        doc = json.loads(json.dumps(MINIMAL))
        doc["tool_plan"][0][field] = value
        with pytest.raises(SchemaViolation) as err:
            parse_trajectory(json.dumps(doc))
        assert err.value.path == path

    def test_non_scalar_argument_rejected(self):
        doc = json.loads(json.dumps(MINIMAL))
        doc["tool_plan"][0]["arguments"]["width"] = [9]
        with pytest.raises(SchemaViolation) as err:
            parse_trajectory(json.dumps(doc))
        assert err.value.path == "$.tool_plan[0].arguments.width"

    def test_negative_revision_rejected(self):
        doc = dict(MINIMAL, revision=-1)
        with pytest.raises(SchemaViolation) as err:
            parse_trajectory(json.dumps(doc))
        assert err.value.path == "$.revision"

    def test_bad_risks_rejected(self):
        doc = dict(MINIMAL, risks=[1, 2])
        with pytest.raises(SchemaViolation) as err:
            parse_trajectory(json.dumps(doc))
        assert err.value.path == "$.risks[0]"

    def test_binding_used_before_defined(self):
        doc = json.loads(json.dumps(MINIMAL))
        doc["tool_plan"][0]["arguments"]["width"] = "@later"
        doc["tool_plan"].append(
            {
                "objective": "x",
                "tool_name": "gen_maze",
                "arguments": {"width": 9, "height": 9},
                "expected_result": "y",
                "output_binding": "later",
            }
        )
        with pytest.raises(DataflowViolation) as err:
            parse_trajectory(json.dumps(doc))
        assert "later" in str(err.value)
        assert err.value.path == "$.tool_plan[0].arguments.width"

    def test_duplicate_binding_rejected(self):
        doc = json.loads(json.dumps(MINIMAL))
        doc["tool_plan"][0]["output_binding"] = "b"
        doc["tool_plan"].append(dict(doc["tool_plan"][0]))
        with pytest.raises(DataflowViolation) as err:
            parse_trajectory(json.dumps(doc))
        assert err.value.path == "$.tool_plan[1].output_binding"


class TestCritiqueParsing:
    def test_plain_approval(self):
        c = parse_critique('{"decision":"approve","blocking_issues":[],"missing_information":[]}')
        assert c.decision == "approve"
        assert c.blocking_issues == ()

    def test_approve_with_issues_normalized(self, caplog):
        doc = {
            "decision": "approve",
            "blocking_issues": [
                {"dimension": "tool_selection", "description": "unknown tool"}
            ],
        }
        with caplog.at_level(logging.WARNING):
            c = parse_critique(json.dumps(doc))
        assert c.decision == "revise"
        assert any("normalizing" in r.message for r in caplog.records)

    def test_unknown_decision_rejected(self):
        with pytest.raises(SchemaViolation) as err:
            parse_critique('{"decision":"maybe"}')
        assert err.value.path == "$.decision"

    def test_unknown_dimension_rejected(self):
        doc = {
            "decision": "revise",
            "blocking_issues": [{"dimension": "vibes", "description": "off"}],
        }
        with pytest.raises(SchemaViolation) as err:
            parse_critique(json.dumps(doc))
        assert err.value.path == "$.blocking_issues[0].dimension"

    def test_bare_revise_rejected(self):
        with pytest.raises(SchemaViolation):
            parse_critique('{"decision":"revise","blocking_issues":[],"missing_information":[]}')

    def test_revise_with_only_missing_information_ok(self):
        c = parse_critique(
            '{"decision":"revise","blocking_issues":[],"missing_information":["grid size"]}'
        )
        assert c.decision == "revise"
        assert c.missing_information == ("grid size",)

    def test_issues_sorted_by_step_index(self):
        doc = {
            "decision": "revise",
            "blocking_issues": [
                {"step_index": 3, "dimension": "logic_sequence", "description": "later"},
                {"dimension": "goal_alignment", "description": "plan-level"},
                {"step_index": 0, "dimension": "tool_selection", "description": "earlier"},
            ],
        }
        c = parse_critique(json.dumps(doc))
        assert [i.step_index for i in c.blocking_issues] == [0, 3, None]
        rendered = render_critique(c)
        assert rendered.index("earlier") < rendered.index("later") < rendered.index("plan-level")


class TestCanonicalRendering:
    def test_trajectory_round_trip(self):
        t = parse_trajectory(json.dumps(MINIMAL))
        assert parse_trajectory(render_trajectory(t)) == t

    def test_semantically_equal_render_identically(self):
        a = json.dumps(MINIMAL, indent=4)
        b = json.dumps(MINIMAL, separators=(",", ":"))
        assert render_trajectory(parse_trajectory(a)) == render_trajectory(parse_trajectory(b))

    def test_render_for_context_dispatch(self):
        t = parse_trajectory(json.dumps(MINIMAL))
        c = Critique.approval()
        assert render_for_context(t) == render_trajectory(t)
        assert render_for_context(c) == render_critique(c)
        with pytest.raises(TypeError):
            render_for_context("something else")

    def test_digest_is_stable_and_content_sensitive(self):
        t = parse_trajectory(json.dumps(MINIMAL))
        assert trajectory_digest(t) == trajectory_digest(t)
        other = parse_trajectory(json.dumps(dict(MINIMAL, trajectory_summary="different")))
        assert trajectory_digest(other) != trajectory_digest(t)


def random_trajectory_doc(rng: random.Random) -> dict:
    words = ["carve", "grow", "smooth", "scatter", "fill", "trim"]
    steps = []
    bindings = []
    for i in range(rng.randrange(1, 5)):
        arguments = {}
        for _ in range(rng.randrange(0, 4)):
            key = rng.choice(["width", "height", "density", "flag", "label"])
            arguments[key] = rng.choice([
                rng.randrange(0, 100),
                round(rng.uniform(0, 1), 6),
                rng.random() < 0.5,
                rng.choice(words),
            ])
        if bindings and rng.random() < 0.4:
            arguments["grid"] = "@" + rng.choice(bindings)
        step = {
            "objective": " ".join(rng.choices(words, k=3)),
            "tool_name": rng.choice(["gen_maze", "mod_smooth", "scatter", "imaginary_tool"]),
            "arguments": arguments,
            "expected_result": " ".join(rng.choices(words, k=2)),
        }
        if rng.random() < 0.6:
            name = f"b{i}"
            step["output_binding"] = name
            bindings.append(name)
        steps.append(step)
    return {
        "trajectory_summary": " ".join(rng.choices(words, k=4)),
        "tool_plan": steps,
        "risks": [" ".join(rng.choices(words, k=2)) for _ in range(rng.randrange(0, 3))],
        "revision": rng.randrange(0, 5),
    }


def random_critique_doc(rng: random.Random) -> dict:
    dimensions = ["tool_selection", "parameter_correctness", "logic_sequence", "goal_alignment"]
    issues = []
    for _ in range(rng.randrange(0, 4)):
        issue = {
            "dimension": rng.choice(dimensions),
            "description": f"issue {rng.randrange(100)}",
        }
        if rng.random() < 0.7:
            issue["step_index"] = rng.randrange(0, 6)
        if rng.random() < 0.5:
            issue["correction_suggestion"] = f"fix {rng.randrange(100)}"
        issues.append(issue)
    missing = [f"need {rng.randrange(100)}" for _ in range(rng.randrange(0, 3))]
    if issues:
        decision = "revise"
    elif missing and rng.random() < 0.5:
        decision = "revise"
    else:
        decision = "approve"
    return {"decision": decision, "blocking_issues": issues, "missing_information": missing}


class TestGeneratedRoundTrips:
    def test_trajectory_round_trip_en_masse(self):
        rng = random.Random(2024)
        for _ in range(300):
            doc = random_trajectory_doc(rng)
            t = parse_trajectory(json.dumps(doc))
            assert parse_trajectory(render_trajectory(t)) == t

    def test_critique_round_trip_en_masse(self):
        rng = random.Random(4048)
        for _ in range(300):
            doc = random_critique_doc(rng)
            c = parse_critique(json.dumps(doc))
            assert parse_critique(render_critique(c)) == c
