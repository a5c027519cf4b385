import math

import numpy as np
import pytest

from bvtrack.core import (
    Domain1D,
    SensorArray,
    ThetaWeights,
    make_uniform_grid,
)


@pytest.fixture()
def small_setup():
    """Cheap discretization for module-level math tests (M=6, L=20)."""
    dom = Domain1D(0.0, 5.0)
    grid = make_uniform_grid(6)
    theta = ThetaWeights.default(6)
    sensors = SensorArray(
        positions=np.linspace(0.0, 5.0, 20),
        sigma2=0.02,
        c=1.0 / math.sqrt(2.0 * math.pi),
    )
    return dom, grid, theta, sensors


@pytest.fixture()
def paper_setup():
    """Reference discretization (M=30, L=100) used by the experiments."""
    from bvtrack.experiments import default_setup

    return default_setup()
