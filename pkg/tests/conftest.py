import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from acceptance_log import LINES  # noqa: E402
from warehouse_mrta.env import builtin_scenario_path, read_scenario  # noqa: E402
from warehouse_mrta.layout import load_layout  # noqa: E402


def pytest_terminal_summary(terminalreporter):
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)


@pytest.fixture
def scenario():
    return read_scenario(builtin_scenario_path())


@pytest.fixture
def cross_layout():
    return load_layout("...\n.#.\n...")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
