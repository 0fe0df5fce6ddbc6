import json
from pathlib import Path

import pytest

from tilesmith.plans import parse_trajectory
from tilesmith.registry import default_registry

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def registry():
    return default_registry()


def load_fixture_plan(name: str):
    return parse_trajectory((FIXTURES / "trajectories" / f"{name}.json").read_text("utf-8"))


@pytest.fixture(scope="session")
def golden_plan():
    return load_fixture_plan("mountain_island")


@pytest.fixture(scope="session")
def two_landmass_plan():
    return load_fixture_plan("two_landmass")


@pytest.fixture(scope="session")
def empty_base_plan():
    return load_fixture_plan("empty_base")


def fixture_json(relative: str):
    return json.loads((FIXTURES / relative).read_text("utf-8"))
