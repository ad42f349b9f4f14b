import re

import numpy as np
import pytest

from sparse_nerve import SparseParams

# Lines recorded by the acceptance tests, echoed in the terminal summary.
ACCEPTANCE_LINES = []


def _criterion(line):
    m = re.match(r"ACCEPTANCE (\d+)", line)
    return (int(m.group(1)) if m else 0, line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=_criterion):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_params(points, epsilon=0.5, metric="l2", seed=0):
    return SparseParams.from_points(np.asarray(points, dtype=float), epsilon, metric, seed,
                                    allow_large_epsilon=epsilon >= 1)


def line_cloud(values):
    return np.asarray(values, dtype=float).reshape(-1, 1)
