"""Shared fixtures and the acceptance-criterion summary reporter."""

import numpy as np
import pytest

from growthfista import expcli

_CRITERION_LINES = []


def report_criterion(num: int, description: str, passed: bool, detail: str = ""):
    status = "PASS" if passed else "FAIL"
    line = f"[{status}] criterion {num}: {description}"
    if detail:
        line += f" ({detail})"
    _CRITERION_LINES.append((num, line))
    print(line)
    assert passed, line


def pytest_terminal_summary(terminalreporter):
    if not _CRITERION_LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for _, line in sorted(_CRITERION_LINES):
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240824)


@pytest.fixture(scope="session")
def rankdef_problem():
    """Rank-deficient least squares, kappa = 1e-2, with its start point."""
    spec = {"name": "rankdef_ls", "dim": 10, "rank": 6, "kappa": 1e-2,
            "x0_dist": 1.0}
    return expcli.build_problem(spec, seed=7)


@pytest.fixture(scope="session")
def hoelder_problem():
    """Power-4 distance function to a 2-D affine subspace in R^10."""
    spec = {"name": "hoelder_dist", "dim": 10, "affine_dim": 2, "gamma": 4.0,
            "K": 1.0, "R": 2.0, "x0_dist": 1.0}
    return expcli.build_problem(spec, seed=11)
