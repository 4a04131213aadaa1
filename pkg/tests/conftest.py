import os

import pytest

from vortexlab import operators as op
from vortexlab import profile_solver as ps
from vortexlab import soliton1d as s1d


@pytest.fixture(scope="session", autouse=True)
def session_cache(tmp_path_factory):
    """Route the profile cache to a session tmp dir so tests share solves
    without touching the working tree."""
    cache = tmp_path_factory.mktemp("vortexlab-cache")
    old = os.environ.get("VORTEXLAB_CACHE")
    os.environ["VORTEXLAB_CACHE"] = str(cache)
    yield str(cache)
    if old is None:
        os.environ.pop("VORTEXLAB_CACHE", None)
    else:
        os.environ["VORTEXLAB_CACHE"] = old


@pytest.fixture(scope="session")
def params3():
    return s1d.balance_constants(3.0, 1.0)


def get_profile(p, omega, m, guard_extra=0, r_pad=40.0, tol=1e-10):
    """Session-cached profile solve on the default (ring-aligned) grid."""
    params = s1d.balance_constants(p, omega)
    grid = op.default_radial_grid(params, m, guard_index=m + guard_extra,
                                  r_pad=r_pad)
    return ps.solve(p, omega, m, grid, tol=tol)


@pytest.fixture(scope="session")
def profile32(session_cache):
    """p=3, omega=1, m=32 on a grid fine enough for sector indices up to 8."""
    return get_profile(3.0, 1.0, 32, guard_extra=8)


@pytest.fixture(scope="session")
def profile16(session_cache):
    """p=3, omega=1, m=16 on a grid fine enough for sector indices up to 6."""
    return get_profile(3.0, 1.0, 16, guard_extra=6)


@pytest.fixture(scope="session")
def profile10_sub(session_cache):
    """Subcritical p=2.5, m=10, on a compact grid where dense eigensolves fit."""
    return get_profile(2.5, 1.0, 10, guard_extra=2, r_pad=25.0)
