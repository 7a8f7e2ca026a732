"""Filter and filter-bank types, the qmf/rev operators and constraint residuals.

A filter of length 2n is a candidate decomposition low-pass filter L_d. It
yields a usable bank when it satisfies n+1 equations:

    sum_j l_j * l_(j+2k) = 0          for every shift k = 1 .. n-1
    l_1 + l_3 + ... = l_2 + l_4 + ... (parity)
    l_1^2 + ... + l_2n^2 = 1          (unit norm)

Tap positions in docstrings and reports are 1-based; storage is left to right.
"""

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from wavegen.errors import FilterError


@dataclass(frozen=True, init=False)
class Filter:
    """An immutable, even-length sequence of finite real taps.

    Attributes:
        taps: The taps l_1 .. l_2n as a tuple of floats.
    """

    taps: tuple[float, ...]

    def __init__(self, taps: Iterable[float]) -> None:
        values = tuple(float(t) for t in np.asarray(taps, dtype=np.float64).ravel())
        if len(values) < 2 or len(values) % 2:
            raise FilterError(f"filter length must be even and >= 2, got {len(values)}")
        if not all(math.isfinite(v) for v in values):
            raise FilterError("filter taps must be finite")
        object.__setattr__(self, "taps", values)

    @property
    def n(self) -> int:
        """Half-length of the filter."""
        return len(self.taps) // 2

    def __len__(self) -> int:
        return len(self.taps)

    def as_array(self) -> np.ndarray:
        """Return a fresh float64 copy of the taps."""
        return np.array(self.taps, dtype=np.float64)

    def negate(self) -> "Filter":
        return Filter(-self.as_array())

    def scaled(self, factor: float) -> "Filter":
        return Filter(factor * self.as_array())

    def dot(self, other: "Filter") -> float:
        if len(other) != len(self):
            raise FilterError(f"length mismatch: {len(self)} vs {len(other)}")
        return float(np.dot(self.as_array(), other.as_array()))

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))


@dataclass(frozen=True)
class FilterBank:
    """The four filters derived from one decomposition low-pass filter.

    Attributes:
        l_d: Decomposition low-pass filter.
        h_d: Decomposition high-pass filter, -qmf(l_d).
        l_r: Reconstruction low-pass filter, rev(l_d).
        h_r: Reconstruction high-pass filter, qmf(l_r).
    """

    l_d: Filter
    h_d: Filter
    l_r: Filter
    h_r: Filter

    def __post_init__(self) -> None:
        lengths = {len(self.l_d), len(self.h_d), len(self.l_r), len(self.h_r)}
        if len(lengths) != 1:
            raise FilterError(f"bank filters must share one length, got {sorted(lengths)}")

    @property
    def n(self) -> int:
        return self.l_d.n

    def as_dict(self) -> dict[str, list[float]]:
        return {
            "l_d": list(self.l_d.taps),
            "h_d": list(self.h_d.taps),
            "l_r": list(self.l_r.taps),
            "h_r": list(self.h_r.taps),
        }


@dataclass(frozen=True)
class ResidualReport:
    """Residuals of the n+1 constraint equations for one filter.

    Attributes:
        orthogonality: Residual of the double-shift product equation for shift
            k = 1 .. n-1, stored in ascending k (index 0 is shift 1). The
            equation set is conventionally listed with the largest shift first;
            see listed_equations().
        parity: Odd-position sum minus even-position sum.
        norm: Sum of squared taps minus one.
        total_abs: Sum of absolute values of all n+1 residuals.
    """

    orthogonality: tuple[float, ...]
    parity: float
    norm: float
    total_abs: float = field(init=False)

    ordering = "ascending-shift"

    def __post_init__(self) -> None:
        total = sum(abs(v) for v in self.orthogonality) + abs(self.parity) + abs(self.norm)
        object.__setattr__(self, "total_abs", float(total))

    @property
    def n(self) -> int:
        return len(self.orthogonality) + 1

    def listed_equations(self) -> list[tuple[str, float]]:
        """Return (label, residual) pairs in the conventional listing order.

        Orthogonality equations come first from shift n-1 down to 1, followed
        by the parity and the norm equations.
        """
        rows = [
            (f"orthogonality k={k}", self.orthogonality[k - 1])
            for k in range(len(self.orthogonality), 0, -1)
        ]
        rows.append(("parity", self.parity))
        rows.append(("norm", self.norm))
        return rows


def qmf(f: Filter) -> Filter:
    """Quadrature mirror: reverse the taps and alternate signs starting positive.

    output_i = (-1)^(i+1) * f_(L+1-i) for i = 1 .. L.

    Example: [1, 2, 3, 4] -> [4, -3, 2, -1].
    """
    reversed_taps = f.as_array()[::-1]
    signs = np.where(np.arange(len(f)) % 2 == 0, 1.0, -1.0)
    return Filter(signs * reversed_taps)


def rev(f: Filter) -> Filter:
    """Reverse the tap order."""
    return Filter(f.as_array()[::-1])


def derive_bank(l_d: Filter) -> FilterBank:
    """Build the full bank determined by a decomposition low-pass filter.

    The filter does not need to satisfy the constraint equations; use
    constraint_residuals() to check it.
    """
    l_r = rev(l_d)
    return FilterBank(l_d=l_d, h_d=qmf(l_d).negate(), l_r=l_r, h_r=qmf(l_r))


def orthogonality_values(taps: np.ndarray) -> np.ndarray:
    """Double-shift products sum_j l_j l_(j+2k) for k = 1 .. n-1."""
    length = taps.shape[0]
    full = np.correlate(taps, taps, mode="full")
    # full[length - 1 + s] is the lag-s autocorrelation
    return full[length + 1 : 2 * length - 1 : 2]


def parity_value(taps: np.ndarray) -> float:
    return float(taps[0::2].sum() - taps[1::2].sum())


def constraint_residuals(l_d: Filter) -> ResidualReport:
    """Evaluate every equation of the constraint set for a filter.

    Args:
        l_d: Candidate decomposition low-pass filter.

    Returns:
        A ResidualReport. For n = 1 the orthogonality tuple is empty.
    """
    taps = l_d.as_array()
    return ResidualReport(
        orthogonality=tuple(float(v) for v in orthogonality_values(taps)),
        parity=parity_value(taps),
        norm=float(np.dot(taps, taps) - 1.0),
    )


def lyapunov(l_d: Filter) -> float:
    """Sum of squared orthogonality and parity residuals.

    The norm equation is excluded. This is the objective each coordinate
    update of the solver minimizes, and it is zero exactly when the first n
    equations hold.
    """
    taps = l_d.as_array()
    return lyapunov_of(taps)


def lyapunov_of(taps: np.ndarray) -> float:
    ortho = orthogonality_values(taps)
    parity = parity_value(taps)
    return float(np.dot(ortho, ortho) + parity * parity)


def as_filter(taps: Filter | Sequence[float] | np.ndarray) -> Filter:
    """Coerce a tap sequence into a Filter, passing Filters through."""
    return taps if isinstance(taps, Filter) else Filter(taps)
