"""Shared fixtures: solved banks are expensive, so they are computed once per session."""

from typing import Callable

import numpy as np
import pytest

from wavegen.catalog import lookup
from wavegen.filterbank import FilterBank, derive_bank
from wavegen.solver import SolveResult, SolverConfig, solve


def solve_until_converged(n: int, epsilon: float = 1e-13, attempts: int = 20) -> SolveResult:
    """Solve with seeds 0, 1, ... and return the first converged result."""
    for seed in range(attempts):
        result = solve(SolverConfig(n=n, epsilon=epsilon, seed=seed))
        if result.converged:
            return result
    raise AssertionError(f"no seed in 0..{attempts - 1} converged for n={n}")


@pytest.fixture(scope="session")
def solved_bank() -> Callable[[int], FilterBank]:
    """Return a factory of converged banks, cached by half-length."""
    cache: dict[int, FilterBank] = {}

    def get(n: int) -> FilterBank:
        if n not in cache:
            cache[n] = derive_bank(solve_until_converged(n).filter)
        return cache[n]

    return get


@pytest.fixture(scope="session")
def haar_bank() -> FilterBank:
    return derive_bank(lookup("haar").taps)


@pytest.fixture(scope="session")
def db3_bank() -> FilterBank:
    return derive_bank(lookup("db3").taps)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)
