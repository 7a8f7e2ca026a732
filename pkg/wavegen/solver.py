"""Numerical solution of the constraint equations by per-coordinate least squares.

Each sweep visits taps 1 .. 2n in ascending order and replaces the tap with
the minimizer of the Lyapunov functional over that tap alone (the functional
is quadratic in any single tap), then rescales the filter to unit norm unless
some taps are pinned. Sweeps repeat until the total absolute residual of all
n+1 equations drops below epsilon or the sweep cap is reached.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Iterable, Mapping, Optional

import numpy as np

from wavegen.errors import ConfigError, SolverError, ZeroDivisorError
from wavegen.filterbank import (
    Filter,
    ResidualReport,
    constraint_residuals,
    lyapunov_of,
    orthogonality_values,
    parity_value,
)

log = logging.getLogger(__name__)

DEFAULT_EPSILON = 1e-13
DEFAULT_MAX_SWEEPS = 20000
MAX_RESEEDS = 8
DEGENERATE_DENOMINATOR = 1e-30
CLOSED_FORM_GUARD = 1e-12


class SolveStatus(str, Enum):
    CONVERGED = "converged"
    MAX_SWEEPS = "max_sweeps"


@dataclass(frozen=True)
class SolverConfig:
    """Run parameters for solve().

    Attributes:
        n: Half-length of the filter to solve for.
        epsilon: Stop once the total absolute residual is below this value.
        max_sweeps: Upper bound on the number of sweeps.
        seed: Seed for the initial random draw (64-bit unsigned).
        pinned: Map from 1-based tap position to a value held fixed.
        init: Explicit starting filter; bypasses the random draw.
    """

    n: int
    epsilon: float = DEFAULT_EPSILON
    max_sweeps: int = DEFAULT_MAX_SWEEPS
    seed: int = 0
    pinned: Mapping[int, float] = field(default_factory=dict)
    init: Optional[Filter] = None

    def __post_init__(self) -> None:
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 1:
            raise ConfigError(f"n must be a positive integer, got {self.n!r}")
        if not math.isfinite(self.epsilon) or self.epsilon <= 0:
            raise ConfigError(f"epsilon must be finite and positive, got {self.epsilon}")
        if self.max_sweeps < 1:
            raise ConfigError(f"max_sweeps must be at least 1, got {self.max_sweeps}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        length = 2 * self.n
        pinned = {int(pos): float(value) for pos, value in dict(self.pinned).items()}
        for pos, value in pinned.items():
            if not 1 <= pos <= length:
                raise ConfigError(f"pinned position {pos} outside 1..{length}")
            if not math.isfinite(value):
                raise ConfigError(f"pinned value at position {pos} is not finite")
        object.__setattr__(self, "pinned", pinned)
        if self.init is not None and len(self.init) != length:
            raise ConfigError(f"init has {len(self.init)} taps, expected {length}")


@dataclass(frozen=True)
class TraceRecord:
    sweep: int
    lyapunov: float
    total_abs: float


@dataclass(frozen=True)
class ConvergenceTrace:
    """Per-sweep history of a solve.

    Attributes:
        records: One record per sweep, measured after normalization.
        status: CONVERGED if the final total_abs is below epsilon.
        skipped_updates: Coordinate updates skipped for a degenerate column.
        reseeds: Random redraws needed to get a non-zero starting vector.
    """

    records: tuple[TraceRecord, ...]
    status: SolveStatus
    skipped_updates: int = 0
    reseeds: int = 0

    @property
    def sweeps_used(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class SolveResult:
    filter: Filter
    report: ResidualReport
    trace: ConvergenceTrace
    config: SolverConfig

    @property
    def converged(self) -> bool:
        return self.trace.status is SolveStatus.CONVERGED


@lru_cache(maxsize=64)
def _neighbour_tables(length: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Index tables for the coefficient of each tap in each shift equation.

    Row i lists, for shifts k = 1 .. n-1, the positions i+2k and i-2k; positions
    out of range point at index `length`, a zero pad slot of the work array.
    """
    n = length // 2
    shifts = 2 * np.arange(1, n)
    positions = np.arange(length)[:, None]
    plus = np.where(positions + shifts < length, positions + shifts, length)
    minus = np.where(positions - shifts >= 0, positions - shifts, length)
    signs = np.where(np.arange(length) % 2 == 0, 1.0, -1.0)
    for table in (plus, minus, signs):
        table.setflags(write=False)
    return plus, minus, signs


def _update_in_place(work: np.ndarray, i: int, length: int) -> bool:
    """Least-squares update of tap i (0-based) of a zero-padded work array.

    Returns False when the column is degenerate and the tap is left alone.
    """
    plus, minus, signs = _neighbour_tables(length)
    taps = work[:length]
    current = work[i]
    beta = work[plus[i]] + work[minus[i]]
    alpha = beta * current - orthogonality_values(taps)
    sign = signs[i]
    parity_alpha = sign * current - parity_value(taps)
    denominator = float(np.dot(beta, beta)) + 1.0
    if denominator < DEGENERATE_DENOMINATOR:
        log.debug("degenerate column at position %d, tap kept", i + 1)
        return False
    work[i] = (float(np.dot(alpha, beta)) + parity_alpha * sign) / denominator
    return True


def _work_array(taps: np.ndarray) -> np.ndarray:
    return np.append(np.asarray(taps, dtype=np.float64), 0.0)


def _normalize_in_place(taps: np.ndarray) -> None:
    norm = math.sqrt(float(np.dot(taps, taps)))
    if norm == 0.0:
        raise SolverError("cannot normalize zero vector")
    taps /= norm


def _sweep_in_place(work: np.ndarray, length: int, pinned: Iterable[int]) -> int:
    fixed = set(pinned)
    skipped = 0
    for i in range(length):
        if i + 1 in fixed:
            continue
        if not _update_in_place(work, i, length):
            skipped += 1
    if not fixed:
        _normalize_in_place(work[:length])
    return skipped


def coordinate_update(l: Filter, i: int) -> Filter:
    """Replace tap i (1-based) by the least-squares minimizer of the Lyapunov functional.

    For every orthogonality equation the coefficient of l_i is
    beta_k = l_(i+2k) + l_(i-2k) (terms out of range omitted), and for the
    parity equation it is +1 at odd positions and -1 at even ones. With
    alpha_k = beta_k * l_i - (equation value), the new tap is
    sum(alpha_k * beta_k) / sum(beta_k^2). The norm equation does not take part.

    Args:
        l: Current filter.
        i: 1-based tap position to update.

    Returns:
        A new Filter with only tap i changed.

    Raises:
        IndexError: If i is outside 1..2n.
    """
    length = len(l)
    if not 1 <= i <= length:
        raise IndexError(f"tap position {i} outside 1..{length}")
    work = _work_array(l.as_array())
    _update_in_place(work, i - 1, length)
    return Filter(work[:length])


def sweep(l: Filter, pinned: Optional[Mapping[int, float] | Iterable[int]] = None) -> Filter:
    """Update taps 1..2n in ascending order, skipping pinned ones.

    When nothing is pinned the result is rescaled to unit norm.

    Raises:
        SolverError: If the vector to normalize is zero.
    """
    length = len(l)
    work = _work_array(l.as_array())
    _sweep_in_place(work, length, pinned or ())
    return Filter(work[:length])


def _initial_taps(config: SolverConfig) -> tuple[np.ndarray, int]:
    length = 2 * config.n
    if config.init is not None:
        return config.init.as_array(), 0
    rng = np.random.default_rng(config.seed)
    for attempt in range(MAX_RESEEDS + 1):
        taps = rng.uniform(-1.0, 1.0, length)
        if np.any(taps != 0.0):
            _normalize_in_place(taps)
            return taps, attempt
        log.debug("zero initial vector for seed %d, redrawing", config.seed)
    raise SolverError(f"could not draw a non-zero initial vector after {MAX_RESEEDS} reseeds")


def solve(config: SolverConfig) -> SolveResult:
    """Run sweeps until the residual drops below epsilon or the cap is hit.

    Initialization draws taps i.i.d. uniform on [-1, 1] from the seeded
    generator and normalizes them, unless config.init is given. Pinned taps
    overwrite their positions afterwards and stay bitwise fixed; with pins,
    per-sweep normalization is skipped, so the norm residual stays visible in
    the report.

    Args:
        config: Validated run parameters.

    Returns:
        SolveResult with the final filter, its residual report and the trace.

    Raises:
        SolverError: If a zero vector has to be normalized or no usable
            starting vector could be drawn.
    """
    length = 2 * config.n
    taps, reseeds = _initial_taps(config)
    for pos, value in config.pinned.items():
        taps[pos - 1] = value
    work = _work_array(taps)

    records: list[TraceRecord] = []
    skipped = 0
    status = SolveStatus.MAX_SWEEPS
    for sweep_index in range(1, config.max_sweeps + 1):
        skipped += _sweep_in_place(work, length, config.pinned)
        current = work[:length]
        report = constraint_residuals(Filter(current))
        records.append(TraceRecord(sweep_index, lyapunov_of(current), report.total_abs))
        if sweep_index % 1000 == 0:
            log.debug("sweep %d: total_abs=%.3e", sweep_index, report.total_abs)
        if report.total_abs < config.epsilon:
            status = SolveStatus.CONVERGED
            break

    result_filter = Filter(work[:length])
    log.debug(
        "solve n=%d seed=%d finished: %s after %d sweeps",
        config.n,
        config.seed,
        status.value,
        len(records),
    )
    return SolveResult(
        filter=result_filter,
        report=constraint_residuals(result_filter),
        trace=ConvergenceTrace(tuple(records), status, skipped, reseeds),
        config=config,
    )


def solve_many(configs: Iterable[SolverConfig], workers: int = 1) -> list[SolveResult]:
    """Run independent solves, in a process pool when workers > 1.

    Results come back in input order and are identical to sequential runs.
    """
    configs = list(configs)
    if workers <= 1 or len(configs) <= 1:
        return [solve(config) for config in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(solve, configs))


def best_result(results: Iterable[SolveResult]) -> SolveResult:
    """Pick the result with the smallest total absolute residual."""
    results = list(results)
    if not results:
        raise ValueError("no results to choose from")
    return min(results, key=lambda result: result.report.total_abs)


def closed_form_n3(l1: float, l5: float, l6: float) -> Filter:
    """Complete a 6-tap filter from l_1, l_5 and l_6.

    l_2 = -l_1 l_5 / l_6, and with a = l_2 + l_6 and d = a + l_1 + l_5:
    l_3 = (a - l_1 - l_5) a / d and l_4 = -(a - l_1 - l_5)(l_1 + l_5) / d.

    The result satisfies both orthogonality equations and the parity equation;
    the norm is not enforced, and rescaling the whole vector keeps those three
    homogeneous equations intact.

    Raises:
        ZeroDivisorError: If |l_6| or |d| is below 1e-12.
    """
    if abs(l6) < CLOSED_FORM_GUARD:
        raise ZeroDivisorError(f"l6={l6} is too close to zero for the closed form")
    l2 = -l1 * l5 / l6
    a = l2 + l6
    d = a + l1 + l5
    if abs(d) < CLOSED_FORM_GUARD:
        raise ZeroDivisorError(f"denominator {d} is too close to zero for the closed form")
    gap = a - l1 - l5
    l3 = gap * a / d
    l4 = -gap * (l1 + l5) / d
    return Filter([l1, l2, l3, l4, l5, l6])
