"""Shared fixtures: deterministic RNG, headline parameter tuples, and a
session-wide cache for the expensive lattice minimizations.

Every randomized test draws from a fixed seed and the hypothesis profile is
derandomized, so the suite is reproducible run to run.
"""

from __future__ import annotations

import random
import time

import pytest
from hypothesis import HealthCheck, settings

from critcouple.exponents import ParamSet
from critcouple.gagliardo import (
    Grid1D,
    MinimizeOptions,
    RayleighResult,
    gaussian_bump,
    minimize_scalar,
)

settings.register_profile(
    "ci",
    derandomize=True,
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")

SEED = 20260815

# The descent needs the rearrangement projection and an exhausted line search
# (tol = 0) to pass the shallow critical points of the heavy-tail tuples.
GROUND_OPTS = MinimizeOptions(tol=0.0, max_iter=30_000, symmetrize=True)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(SEED)


@pytest.fixture(scope="session")
def moderate_params() -> ParamSet:
    """Interior minimum at a moderate tau; converges in a few hundred steps."""
    return ParamSet.from_alpha(1, 0.25, 1.8, 1.5)


@pytest.fixture(scope="session")
def heavy_tail_params() -> ParamSet:
    """Interior minimum at tau ~ 215; the slowest-converging headline tuple."""
    return ParamSet.from_alpha(1, 0.5, 1.5, 1.2)


@pytest.fixture(scope="session")
def scalar_ground_state():
    """Memoized scalar quotient minimization on the default L = 20 grid.

    The scalar problem depends only on (N, s, p, n), so several tests share
    one run per tuple.
    """
    cache: dict[tuple, tuple[RayleighResult, float]] = {}

    def entry(params: ParamSet, n: int = 128) -> tuple[RayleighResult, float]:
        """(result, compute seconds); the cost stays attributable to whichever
        budgeted test consumes the entry, even when it was filled earlier."""
        key = (params.N, params.s, params.p, n)
        if key not in cache:
            grid = Grid1D(20.0, n)
            start = time.perf_counter()
            result = minimize_scalar(gaussian_bump(grid), params, GROUND_OPTS)
            cache[key] = (result, time.perf_counter() - start)
        return cache[key]

    def run(params: ParamSet, n: int = 128) -> RayleighResult:
        return entry(params, n)[0]

    run.entry = entry
    return run
