import math

import numpy as np
import pytest

from spfem.fem import ScalarFunction
from spfem.lab import run_study
from spfem.mesh import build_structured_mesh
from spfem.occupancy import DistributionParams
from spfem.scf import ScfConfig

PI = math.pi


@pytest.fixture(scope="session")
def mesh4():
    return build_structured_mesh(4)


@pytest.fixture(scope="session")
def mesh8():
    return build_structured_mesh(8)


@pytest.fixture(scope="session")
def mesh16():
    return build_structured_mesh(16)


@pytest.fixture(scope="session")
def params():
    return DistributionParams()  # boltzmann, f0=1, mu=0.1, N0=100


@pytest.fixture(scope="session")
def example1_study(params):
    """Benchmark-1 convergence study on m = 4, 8, 16 with full reports."""
    return run_study(1, params, (4, 8, 16), ScfConfig(), return_reports=True)


@pytest.fixture(scope="session")
def example2_study(params):
    """Benchmark-2 convergence study on m = 4, 8, 16 with full reports."""
    return run_study(2, params, (4, 8, 16), ScfConfig(), return_reports=True)


def sine_product():
    """sin(pi x) sin(pi y) sin(pi z) with its analytic gradient."""

    def f(p):
        return np.sin(PI * p[..., 0]) * np.sin(PI * p[..., 1]) \
            * np.sin(PI * p[..., 2])

    def grad(p):
        sx, sy, sz = (np.sin(PI * p[..., d]) for d in range(3))
        cx, cy, cz = (np.cos(PI * p[..., d]) for d in range(3))
        return PI * np.stack([cx * sy * sz, sx * cy * sz, sx * sy * cz],
                             axis=-1)

    return ScalarFunction(f, grad=grad, name="sine-product")
