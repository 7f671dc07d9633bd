"""Shared fixtures: shipped scenarios, one simulation and one feasibility
scan per scenario for the whole session. Tests treat these as read-only.
"""

from pathlib import Path

import pytest

from slidenav import feasibility, sim
from slidenav.scenario import load

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "scenarios"


@pytest.fixture(scope="session")
def static_scenario():
    return load(SCENARIO_DIR / "static_disc.txt")


@pytest.fixture(scope="session")
def moving_scenario():
    return load(SCENARIO_DIR / "moving_disc.txt")


@pytest.fixture(scope="session")
def fast_scenario_path():
    return SCENARIO_DIR / "fast_disc.txt"


@pytest.fixture(scope="session")
def mistuned_scenario_path():
    return SCENARIO_DIR / "mistuned_disc.txt"


@pytest.fixture(scope="session")
def static_run(static_scenario):
    return sim.run(static_scenario)


@pytest.fixture(scope="session")
def moving_run(moving_scenario):
    return sim.run(moving_scenario)


@pytest.fixture(scope="session")
def static_report(static_scenario):
    return feasibility.run_feasibility(static_scenario)


@pytest.fixture(scope="session")
def moving_report(moving_scenario):
    return feasibility.run_feasibility(moving_scenario)


@pytest.fixture(scope="session")
def static_trace_file(static_run, tmp_path_factory):
    path = tmp_path_factory.mktemp("traces") / "static_trace.txt"
    static_run.trace.write(path)
    return path
