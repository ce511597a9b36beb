import numpy as np
import pytest

import hardyctrl as hc
from hardyctrl.system import SystemRealization


def make_scalar(a=1.0, b1=1.0, b2=1.0, c=1.0) -> SystemRealization:
    """Scalar realization with unit weight (control penalty is the identity)."""
    arr = lambda v: np.array([[float(v)]])
    return SystemRealization(A=arr(a), B1=arr(b1), B2=arr(b2), C1=arr(c),
                             D1=arr(1.0), weights=np.array([1.0]))


def small_instance(seed: int, n: int = 6):
    """Random-mask scenario-sized instance on a tiny interval grid."""
    rng = np.random.default_rng(seed)
    grid = hc.build_grid("interval_1d", n)
    idx = np.arange(n)
    obs = idx < n // 2
    core = obs & (rng.random(n) < 0.7)
    if not core.any():
        core = obs.copy()
    dist = rng.random(n) < 0.6
    if not dist.any():
        dist[rng.integers(n)] = True
    b = rng.standard_normal(n)
    lam = float(rng.uniform(0.0, 0.2))
    a0 = float(rng.uniform(0.0, 1.0))
    return hc.assemble_scenario(grid, hc.DISTRIBUTED, lam=lam, a0=a0,
                                disturbance=dist, core=core, observed=obs, b=b)


@pytest.fixture(scope="session")
def grid_1d():
    return hc.build_grid("interval_1d", 200)


@pytest.fixture(scope="session")
def grid_radial():
    return hc.build_grid("radial_ball", 128, dim_N=4)


@pytest.fixture(scope="session")
def sys_1d(grid_1d):
    return hc.assemble_scenario(grid_1d, hc.BOUNDARY_1D, lam=0.2, a0=1.0,
                                disturbance=(0.2, 0.8), core=(0.1, 0.3),
                                observed=(0.0, 0.5))


@pytest.fixture(scope="session")
def sys_distributed(grid_radial):
    return hc.assemble_scenario(grid_radial, hc.DISTRIBUTED, lam=0.5, a0=1.0,
                                disturbance=(0.2, 0.8), core=(0.1, 0.3),
                                observed=(0.0, 0.5), b=(0.55, 0.9))


@pytest.fixture(scope="session")
def sys_boundary_radial(grid_radial):
    return hc.assemble_scenario(grid_radial, hc.BOUNDARY_RADIAL, lam=0.5, a0=1.0,
                                disturbance=(0.2, 0.8), core=(0.1, 0.3),
                                observed=(0.0, 0.5), alphas=[1.0])


@pytest.fixture(scope="session")
def sol_1d(sys_1d):
    sol = hc.newton_kleinman(sys_1d, 0.15)
    assert sol.status == "converged"
    return sol


@pytest.fixture(scope="session")
def sol_distributed(sys_distributed):
    sol = hc.newton_kleinman(sys_distributed, 0.2)
    assert sol.status == "converged"
    return sol


@pytest.fixture(scope="session")
def sol_boundary_radial(sys_boundary_radial):
    sol = hc.newton_kleinman(sys_boundary_radial, 0.2)
    assert sol.status == "converged"
    return sol
