import sys

import numpy as np
import pytest
from scipy.stats import ortho_group

from projenergy.geometry import SpherePoint


def random_point(rng, d):
    return SpherePoint(rng.standard_normal(d + 1))


def random_orthogonal(d, seed):
    return ortho_group.rvs(d + 1, random_state=seed)


def finite_difference_directional(f, x: np.ndarray, direction: np.ndarray, h=1e-5):
    """Central difference of f along the great circle through x with unit tangent ``direction``."""
    plus = x * np.cos(h) + direction * np.sin(h)
    minus = x * np.cos(h) - direction * np.sin(h)
    return (f(plus) - f(minus)) / (2 * h)


def unit_tangent(rng, x):
    g = rng.standard_normal(x.size)
    g -= (g @ x) * x
    return g / np.linalg.norm(g)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
