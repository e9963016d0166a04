"""Shared fixtures; heavy objects (bump tables, kernel tables, weights) are
built once per session and reused across module and acceptance tests."""

from functools import lru_cache

import numpy as np
import pytest

import restrictlab as rl

ALPHA_CANTOR = np.log(2.0) / np.log(3.0)


@lru_cache(maxsize=None)
def cached_bump() -> rl.BumpPair:
    return rl.make_bump_pair()


@lru_cache(maxsize=None)
def cached_kernel(lam: float, x_max: float = 1.0) -> rl.SphericalKernel:
    return rl.make_kernel(lam, x_max=x_max)


@lru_cache(maxsize=None)
def cached_weight(alpha: float, depth: int, lam: float,
                  spw: int = 8) -> rl.WeightFunction:
    nu = rl.make_cantor_measure(alpha, depth)
    return rl.build_weight(nu, lam, cached_bump(), samples_per_wavelength=spw)


@lru_cache(maxsize=None)
def cached_algebra(maximal: bool = False) -> rl.QuatAlgebra:
    if maximal:
        return rl.QuatAlgebra(2, 3, basis=rl.MAXIMAL_ORDER_2_3, q=6)
    return rl.QuatAlgebra(2, 3, q=6)


@pytest.fixture(scope="session")
def bump():
    return cached_bump()


@pytest.fixture(scope="session")
def kernel100():
    return cached_kernel(100.0)


@pytest.fixture(scope="session")
def algebra():
    return cached_algebra()


@pytest.fixture(scope="session")
def algebra_maximal():
    return cached_algebra(True)


def uniform_weight(level_h: float = 1e-3, lo: float = 0.0, hi: float = 1.0,
                   alpha: float = 1.0) -> rl.WeightFunction:
    """Density-1 weight whose piecewise-constant cells tile [lo, hi] exactly."""
    h = level_h
    n_tot = int(round(4.0 / h))
    grid_min = -2.0 + h / 2.0
    x = grid_min + h * np.arange(n_tot)
    vals = np.where((x > lo) & (x < hi), 1.0, 0.0)
    return rl.WeightFunction(grid_min, h, vals, lambda_ref=1.0, frostman_alpha=alpha)
