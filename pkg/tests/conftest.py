import numpy as np
import pytest

from conveyorpick import (
    Point2,
    ScaraArm,
    TelescopingArm,
    Workspace,
    build_pnp_table,
)
from conveyorpick import _kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile every numba kernel once so timings stay honest."""
    _kernels.warm_up()


@pytest.fixture(scope="session")
def default_workspace():
    return Workspace(x_left=-5.0, x_right=5.0, y_top=5.0)


@pytest.fixture(scope="session")
def wide_workspace():
    # no belt exit: isolates timing questions from feasibility
    return Workspace(x_left=-1e9, x_right=1e9, y_top=5.0)


@pytest.fixture(scope="session")
def scara_arm(default_workspace):
    return ScaraArm.default_for_workspace(default_workspace)


@pytest.fixture(scope="session")
def scara_table(scara_arm, default_workspace):
    return build_pnp_table(scara_arm, default_workspace, (100, 100))


def random_snapshot_pairs(n, seed, x_range=(3.0, 5.0), y_range=(0.0, 5.0)):
    rng = np.random.default_rng(seed)
    xs = rng.uniform(*x_range, n)
    ys = rng.uniform(*y_range, n)
    return tuple((i, Point2(float(xs[i]), float(ys[i]))) for i in range(n))
