import numpy as np
import pytest

from skspline import _accel
from skspline.kernels import GaussianKernel
from skspline.lattice import new_lattice

HEX = [[1.0, 0.5], [0.0, np.sqrt(3.0) / 2.0]]

# the four lattice configurations used throughout (kernel B = identity)
CONFIGS = {
    "n1_A1": [[1.0]],
    "n1_A2": [[2.0]],
    "n2_identity": [[1.0, 0.0], [0.0, 1.0]],
    "n2_hexagonal": HEX,
}


@pytest.fixture(scope="session", autouse=True)
def _compile_kernels():
    """Trigger JIT compilation once so timing checks measure the numerics only."""
    x = np.zeros((2, 1))
    _accel.gauss_shift_sum(x, x, np.ones(2), np.eye(1))
    _accel.phase_sum(x, x, np.ones(2))


@pytest.fixture(params=sorted(CONFIGS))
def config(request):
    lat = new_lattice(CONFIGS[request.param])
    return request.param, lat, GaussianKernel(np.eye(lat.dim))


@pytest.fixture
def unit1():
    return new_lattice([[1.0]]), GaussianKernel([[1.0]])


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[number])
