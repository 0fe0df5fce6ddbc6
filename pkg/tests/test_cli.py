import json
import socket
import subprocess
import sys
import time

import httpx
import pytest
from click.testing import CliRunner

from tilesmith.cli import main

from .conftest import FIXTURES

GOLDEN = str(FIXTURES / "trajectories" / "mountain_island.json")
INVALID = str(FIXTURES / "trajectories" / "invalid_unknown_tool.json")


@pytest.fixture()
def runner():
    return CliRunner()


class TestValidate:
    def test_golden_plan_approves(self, runner):
        result = runner.invoke(main, ["validate", GOLDEN])
        assert result.exit_code == 0
        assert "approve" in result.output

    def test_invalid_plan_exits_one_with_issue(self, runner):
        result = runner.invoke(main, ["validate", INVALID])
        assert result.exit_code == 1
        assert "tool_selection" in result.output
        assert "gen_mountains" in result.output

    def test_unparseable_file_exits_two(self, runner, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json", encoding="utf-8")
        result = runner.invoke(main, ["validate", str(bad)])
        assert result.exit_code == 2


class TestExecute:
    def test_writes_map_and_exits_zero(self, runner, tmp_path):
        out = tmp_path / "map.json"
        result = runner.invoke(main, ["execute", GOLDEN, "--seed", "42", "-o", str(out)])
        assert result.exit_code == 0, result.output
        doc = json.loads(out.read_text("utf-8"))
        assert doc["format"] == "map-artifact/1"
        frozen = (FIXTURES / "artifacts" / "mountain_island_seed42.json").read_text("utf-8")
        assert out.read_text("utf-8") == frozen

    def test_ascii_output(self, runner, tmp_path):
        out = tmp_path / "map.json"
        result = runner.invoke(
            main, ["execute", GOLDEN, "--seed", "42", "-o", str(out), "--ascii"]
        )
        assert result.exit_code == 0
        assert "tier_2" in result.output
        assert "#" in result.output

    def test_failing_plan_exits_one(self, runner, tmp_path):
        out = tmp_path / "map.json"
        result = runner.invoke(main, ["execute", INVALID, "-o", str(out)])
        assert result.exit_code == 1
        assert "failed" in result.output
        assert not out.exists()


class TestGenerate:
    def test_scripted_generate_writes_map_and_trace(self, runner, tmp_path):
        out_dir = tmp_path / "out"
        result = runner.invoke(
            main,
            ["generate", "--backend", "scripted", "--scripted-plan", GOLDEN,
             "--seed", "42", "--out-dir", str(out_dir)],
        )
        assert result.exit_code == 0, result.output
        assert (out_dir / "map.json").exists()
        assert (out_dir / "trace.jsonl").exists()
        lines = (out_dir / "trace.jsonl").read_text("utf-8").splitlines()
        kinds = [json.loads(l)["type"] for l in lines]
        assert kinds.count("outcome") == 1
        assert "approved" in result.output

    def test_generate_default_plan_is_bundled_example(self, runner, tmp_path):
        out_dir = tmp_path / "out"
        result = runner.invoke(
            main, ["generate", "--backend", "scripted", "--out-dir", str(out_dir)]
        )
        assert result.exit_code == 0, result.output
        assert (out_dir / "map.json").exists()


class TestEval:
    def test_experiment_one_scripted(self, runner, tmp_path):
        report_path = tmp_path / "report.json"
        result = runner.invoke(
            main,
            ["eval", "--experiment", "one", "--backend", "scripted",
             "--trials", "3", "--out", str(report_path)],
        )
        assert result.exit_code == 0, result.output
        report = json.loads(report_path.read_text("utf-8"))
        assert report["trials"] == 3
        assert report["success_rate"] == 1.0
        assert "Success Rate" in result.output

    def test_experiment_two_scripted(self, runner, tmp_path):
        report_path = tmp_path / "report.json"
        result = runner.invoke(
            main,
            ["eval", "--experiment", "two", "--backend", "scripted",
             "--family", "maze2d", "--out", str(report_path)],
        )
        assert result.exit_code == 0, result.output
        report = json.loads(report_path.read_text("utf-8"))
        assert report["achieves_objective"] is True
        assert report["prompts_required"] == 1


class TestTools:
    def test_list_names_all(self, runner):
        result = runner.invoke(main, ["tools", "list"])
        assert result.exit_code == 0
        for name in ("gen_cellular_automata", "scatter", "build_height_layers"):
            assert name in result.output

    def test_show_known_tool(self, runner):
        result = runner.invoke(main, ["tools", "show", "gen_maze"])
        assert result.exit_code == 0
        assert "### gen_maze" in result.output
        assert "odd" in result.output.lower()

    def test_show_unknown_tool(self, runner):
        result = runner.invoke(main, ["tools", "show", "gen_unicorns"])
        assert result.exit_code == 1


class TestConfigFile:
    def test_toml_config_supplies_defaults(self, runner, tmp_path):
        config = tmp_path / "pcg.toml"
        config.write_text("max_iterations = 2\nseed = 7\n", encoding="utf-8")
        out_dir = tmp_path / "out"
        result = runner.invoke(
            main,
            ["--config", str(config), "generate", "--backend", "scripted",
             "--scripted-plan", GOLDEN, "--out-dir", str(out_dir)],
        )
        assert result.exit_code == 0, result.output

    def test_json_config(self, runner, tmp_path):
        config = tmp_path / "pcg.json"
        config.write_text('{"max_iterations": 1}', encoding="utf-8")
        out_dir = tmp_path / "out"
        result = runner.invoke(
            main,
            ["--config", str(config), "generate", "--backend", "scripted",
             "--scripted-plan", GOLDEN, "--out-dir", str(out_dir)],
        )
        assert result.exit_code == 0, result.output


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


class TestServe:
    def test_serve_answers_healthz(self, tmp_path):
        port = free_port()
        process = subprocess.Popen(
            [sys.executable, "-m", "tilesmith.cli", "serve", "--port", str(port),
             "--data-dir", str(tmp_path / "data")],
            stdout=subprocess.PIPE,
            stderr=subprocess.STDOUT,
        )
        try:
            deadline = time.time() + 20
            last_error = None
            while time.time() < deadline:
                try:
                    response = httpx.get(f"http://127.0.0.1:{port}/healthz", timeout=1.0)
                    assert response.status_code == 200
                    break
                except (httpx.HTTPError, AssertionError) as e:
                    last_error = e
                    time.sleep(0.2)
            else:
                raise AssertionError(f"server never answered: {last_error}")
            tools = httpx.get(f"http://127.0.0.1:{port}/tools", timeout=2.0).json()
            assert "gen_maze" in tools["tools"]
        finally:
            process.terminate()
            process.wait(timeout=10)
