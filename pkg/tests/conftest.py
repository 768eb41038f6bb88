import pytest

from trichokin.integrator import SimulationConfig, integrate
from trichokin.kinetics import State
from trichokin.scenarios import BASELINE_PARAMS


@pytest.fixture(scope="session")
def baseline():
    return BASELINE_PARAMS


@pytest.fixture(scope="session")
def baseline_traj(baseline):
    """Baseline run (45, 15, 50, 0), every RK4 step recorded."""
    return integrate(SimulationConfig(State(45, 15, 50, 0), record_stride=1), baseline)
