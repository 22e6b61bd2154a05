import json

import numpy as np
import pytest

from modules.resolvents.models import SeparableComponent, SumKernel
from modules.resolvents.service import resolvent_service
from modules.star_core.models import Grid
from modules.star_core.service import star_algebra


@pytest.fixture
def algebra():
    return star_algebra


@pytest.fixture
def resolvents():
    return resolvent_service


@pytest.fixture
def unit_grid():
    return Grid(0.0, 1.0, 101)


@pytest.fixture
def small_grid():
    return Grid(0.0, 1.0, 21)


def constant_sum_kernel(grid, a, b):
    ones = star_algebra.make_function(grid, 1.0)
    return SumKernel(grid, (
        SeparableComponent(star_algebra.make_function(grid, a), ones),
        SeparableComponent(star_algebra.make_function(grid, b), ones),
    ))


@pytest.fixture
def constant_ab(unit_grid):
    """K = 1*Theta + 2*Theta with g = 1_* on [0, 1]"""
    return constant_sum_kernel(unit_grid, 1.0, 2.0)


@pytest.fixture
def three_component(unit_grid):
    grid = unit_grid
    return SumKernel(grid, (
        star_algebra.theta(grid),
        SeparableComponent(star_algebra.make_function(grid, grid.nodes), star_algebra.make_function(grid, 1.0)),
        star_algebra.make_kernel(grid, 0, lambda tp, t: np.sin(tp - t)),
    ))


@pytest.fixture
def write_problem(tmp_path):
    """Write a problem dict as JSON and return its path"""
    def write(data, name="problem.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return path
    return write


@pytest.fixture
def constant_problem_data():
    return {
        "grid": {"t_min": 0.0, "t_max": 1.0, "n": 201},
        "field": "real",
        "g": {"delta": 1.0, "smooth": "0"},
        "components": [{"builtin": "constant_ab"}],
        "solver": {"orders": 40, "method": "resummed"},
        "params": {"a": 1.0, "b": 2.0},
    }
