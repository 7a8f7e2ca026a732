"""Single-level analysis and synthesis of 1D signals and 2D images.

Coefficient j (1-based) reads the window s_(2(j-n)+1) .. s_(2j):

    p_j = sum_t s_(2(j-n)+t) * l_(2n+1-t)
    q_j = sum_t s_(2(j-n)+t) * (-1)^(t+1) * l_t

and synthesis rebuilds each pair of samples from n low-pass and n high-pass
coefficients:

    s_(2k-1) = sum_u l_(2u-1) q_(n+k-u) + l_(2u) p_(k+u-1)
    s_(2k)   = sum_u l_(2u-1) p_(k+u-1) - l_(2u) q_(n+k-u)

In PERIODIC mode every index wraps, the analysis is an orthogonal m x m matrix
for a valid filter, and synthesis is its transpose. In MIRROR mode indices
below 1 read the half-sample mirror extension of the left edge; the right edge
is truncated, so samples whose synthesis reaches past the last coefficient are
reconstructed only approximately and are flagged.
"""

import logging
from dataclasses import dataclass, field, replace
from enum import IntEnum
from functools import lru_cache

import numpy as np

from wavegen.errors import TransformError
from wavegen.filterbank import FilterBank

log = logging.getLogger(__name__)

PLANES = ("main", "horizontal", "vertical", "diagonal")


class BoundaryMode(IntEnum):
    """How indices outside the signal are resolved. Values are the container codes."""

    PERIODIC = 0
    MIRROR = 1


@dataclass(frozen=True)
class Signal1D:
    """A reconstructed signal.

    Attributes:
        samples: The reconstructed samples.
        approximate: True where the sample depended on coefficients beyond the
            truncated right boundary (MIRROR mode only).
    """

    samples: np.ndarray
    approximate: np.ndarray

    @property
    def m(self) -> int:
        return int(self.samples.shape[0])


@dataclass(frozen=True)
class Decomposition1D:
    p: np.ndarray
    q: np.ndarray
    mode: BoundaryMode
    m: int

    def __post_init__(self) -> None:
        if self.p.shape != (self.m // 2,) or self.q.shape != (self.m // 2,):
            raise TransformError(
                f"coefficient lengths {self.p.shape[-1]}/{self.q.shape[-1]} "
                f"do not match half of m={self.m}"
            )


@dataclass(frozen=True)
class Decomposition2D:
    """Four coefficient planes of a single-level separable decomposition.

    `horizontal` is low-pass along rows and high-pass along columns, so an
    image of horizontal stripes concentrates its detail energy there.
    """

    main: np.ndarray
    horizontal: np.ndarray
    vertical: np.ndarray
    diagonal: np.ndarray
    mode: BoundaryMode
    rows: int
    cols: int

    def __post_init__(self) -> None:
        expected = (self.rows // 2, self.cols // 2)
        for name in PLANES:
            shape = getattr(self, name).shape
            if shape != expected:
                raise TransformError(f"{name} plane has shape {shape}, expected {expected}")

    def planes(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in PLANES}


@dataclass(frozen=True)
class SubbandEnergy:
    energies: dict[str, float]
    fractions: dict[str, float] = field(default_factory=dict)

    @property
    def total(self) -> float:
        return float(sum(self.energies.values()))


def _check_length(m: int, n: int, what: str = "signal length") -> None:
    if m % 2:
        raise TransformError(f"{what} must be even, got {m}")
    if m < 4 * n:
        raise TransformError(
            f"{what} {m} is too short for a {2 * n}-tap bank: lengths must be at least 4n = {4 * n}"
        )


def _as_signal(s: np.ndarray | list[float], n: int) -> np.ndarray:
    samples = np.asarray(s, dtype=np.float64)
    if samples.ndim != 1:
        raise TransformError(f"signal must be one-dimensional, got shape {samples.shape}")
    _check_length(samples.shape[0], n)
    if not np.all(np.isfinite(samples)):
        raise TransformError("signal samples must be finite")
    return samples


def _as_image(img: np.ndarray, n: int) -> np.ndarray:
    pixels = np.asarray(img, dtype=np.float64)
    if pixels.ndim != 2:
        raise TransformError(f"image must be two-dimensional, got shape {pixels.shape}")
    _check_length(pixels.shape[0], n, "image rows")
    _check_length(pixels.shape[1], n, "image cols")
    if not np.all(np.isfinite(pixels)):
        raise TransformError("image pixels must be finite")
    return pixels


def extend(s: np.ndarray | list[float], n: int) -> np.ndarray:
    """Prefix the signal with its first 2n-1 samples reversed.

    [s_1 .. s_m] becomes [s_(2n-1), .., s_2, s_1, s_1, s_2, .., s_m]. Works
    along the last axis of a batch of signals.

    Raises:
        TransformError: If the signal is shorter than 2n-1.
    """
    samples = np.asarray(s, dtype=np.float64)
    m = samples.shape[-1]
    if m < 2 * n - 1:
        raise TransformError(f"signal length {m} is shorter than 2n-1 = {2 * n - 1}")
    prefix = samples[..., : 2 * n - 1][..., ::-1]
    return np.concatenate([prefix, samples], axis=-1)


@lru_cache(maxsize=128)
def _analysis_windows(m: int, n: int, mode: BoundaryMode) -> np.ndarray:
    """Index of the sample read by coefficient j at window offset t (both 0-based).

    PERIODIC indexes the signal itself; MIRROR indexes the extended signal.
    """
    j = np.arange(m // 2)[:, None]
    t = np.arange(2 * n)[None, :]
    if mode is BoundaryMode.PERIODIC:
        windows = (2 * j + t + 2 - 2 * n) % m
    else:
        windows = 2 * j + t + 1
    windows.setflags(write=False)
    return windows


@lru_cache(maxsize=128)
def _synthesis_windows(half: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    k = np.arange(half)[:, None]
    u = np.arange(n)[None, :]
    p_index = (k + u) % half
    q_index = (n + k - u - 1) % half
    p_index.setflags(write=False)
    q_index.setflags(write=False)
    return p_index, q_index


def _analyze_last_axis(
    x: np.ndarray, bank: FilterBank, mode: BoundaryMode
) -> tuple[np.ndarray, np.ndarray]:
    n = bank.n
    m = x.shape[-1]
    source = x if mode is BoundaryMode.PERIODIC else extend(x, n)
    windows = source[..., _analysis_windows(m, n, mode)]
    p = windows @ bank.l_d.as_array()[::-1]
    q = windows @ bank.h_d.as_array()[::-1]
    return p, q


def _synthesize_last_axis(p: np.ndarray, q: np.ndarray, bank: FilterBank) -> np.ndarray:
    n = bank.n
    half = p.shape[-1]
    p_index, q_index = _synthesis_windows(half, n)
    taps = bank.l_d.as_array()
    odd_taps, even_taps = taps[0::2], taps[1::2]
    p_windows = p[..., p_index]
    q_windows = q[..., q_index]
    out = np.empty(p.shape[:-1] + (2 * half,), dtype=np.float64)
    out[..., 0::2] = q_windows @ odd_taps + p_windows @ even_taps
    out[..., 1::2] = p_windows @ odd_taps - q_windows @ even_taps
    return out


def approximate_samples(m: int, n: int, mode: BoundaryMode) -> np.ndarray:
    """Mask of samples whose synthesis needs coefficients past the right edge.

    Always all False in PERIODIC mode.
    """
    mask = np.zeros(m, dtype=bool)
    if mode is BoundaryMode.MIRROR:
        half = m // 2
        first = max(half - n + 1, 0)
        mask[2 * first :] = True
    return mask


def analyze_1d(
    s: np.ndarray | list[float],
    bank: FilterBank,
    mode: BoundaryMode = BoundaryMode.PERIODIC,
) -> Decomposition1D:
    """Split a signal into low-pass (p) and high-pass (q) halves.

    Args:
        s: Signal of even length m >= 4n.
        bank: Filter bank of half-length n.
        mode: Boundary handling.

    Returns:
        Decomposition1D with m/2 coefficients in each half.

    Raises:
        TransformError: If m is odd, shorter than 4n, or samples are not finite.
    """
    samples = _as_signal(s, bank.n)
    p, q = _analyze_last_axis(samples, bank, mode)
    return Decomposition1D(p=p, q=q, mode=mode, m=samples.shape[0])


def synthesize_1d(d: Decomposition1D, bank: FilterBank) -> Signal1D:
    """Rebuild a signal from its decomposition.

    Raises:
        TransformError: If the decomposition does not fit the bank length.
    """
    _check_length(d.m, bank.n, "decomposition length")
    samples = _synthesize_last_axis(d.p, d.q, bank)
    mask = approximate_samples(d.m, bank.n, d.mode)
    if mask.any():
        log.debug("%d of %d samples reconstructed past the right boundary", mask.sum(), d.m)
    return Signal1D(samples=samples, approximate=mask)


def analyze_2d(
    img: np.ndarray,
    bank: FilterBank,
    mode: BoundaryMode = BoundaryMode.PERIODIC,
) -> Decomposition2D:
    """Separable single-level decomposition: rows first, then columns.

    Raises:
        TransformError: If either dimension is odd or below 4n.
    """
    pixels = _as_image(img, bank.n)
    row_low, row_high = _analyze_last_axis(pixels, bank, mode)
    main, horizontal = (c.T for c in _analyze_last_axis(row_low.T, bank, mode))
    vertical, diagonal = (c.T for c in _analyze_last_axis(row_high.T, bank, mode))
    return Decomposition2D(
        main=main,
        horizontal=horizontal,
        vertical=vertical,
        diagonal=diagonal,
        mode=mode,
        rows=pixels.shape[0],
        cols=pixels.shape[1],
    )


def synthesize_2d(d: Decomposition2D, bank: FilterBank) -> np.ndarray:
    """Invert analyze_2d: columns first, then rows.

    Raises:
        TransformError: If the plane dimensions do not fit the bank length.
    """
    _check_length(d.rows, bank.n, "image rows")
    _check_length(d.cols, bank.n, "image cols")
    row_low = _synthesize_last_axis(d.main.T, d.horizontal.T, bank).T
    row_high = _synthesize_last_axis(d.vertical.T, d.diagonal.T, bank).T
    return _synthesize_last_axis(row_low, row_high, bank)


def analyze_2d_multilevel(
    img: np.ndarray,
    bank: FilterBank,
    levels: int,
    mode: BoundaryMode = BoundaryMode.PERIODIC,
) -> list[Decomposition2D]:
    """Decompose repeatedly on the main plane.

    Returns one decomposition per level, finest first; the main plane of the
    last one is the coarsest approximation.
    """
    if levels < 1:
        raise TransformError(f"levels must be at least 1, got {levels}")
    decompositions = [analyze_2d(img, bank, mode)]
    for _ in range(levels - 1):
        decompositions.append(analyze_2d(decompositions[-1].main, bank, mode))
    return decompositions


def synthesize_2d_multilevel(decompositions: list[Decomposition2D], bank: FilterBank) -> np.ndarray:
    """Invert analyze_2d_multilevel, coarsest level first."""
    if not decompositions:
        raise TransformError("no decomposition levels to synthesize")
    image = synthesize_2d(decompositions[-1], bank)
    for level in reversed(decompositions[:-1]):
        image = synthesize_2d(replace(level, main=image), bank)
    return image


def reconstruction_error(original: np.ndarray, reconstructed: np.ndarray) -> float:
    """Maximum absolute entrywise difference.

    Raises:
        TransformError: If the shapes differ.
    """
    a = np.asarray(original, dtype=np.float64)
    b = np.asarray(reconstructed, dtype=np.float64)
    if a.shape != b.shape:
        raise TransformError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b)))


def subband_energy(d: Decomposition2D) -> SubbandEnergy:
    """Sum of squared coefficients per plane and each plane's share of the total."""
    energies = {name: float(np.sum(plane * plane)) for name, plane in d.planes().items()}
    total = sum(energies.values())
    if total > 0:
        fractions = {name: value / total for name, value in energies.items()}
    else:
        fractions = {name: 0.0 for name in energies}
    return SubbandEnergy(energies=energies, fractions=fractions)


def build_analysis_matrix(bank: FilterBank, m: int) -> np.ndarray:
    """Dense m x m matrix W of the PERIODIC analysis, rows p_1..p_(m/2), q_1..q_(m/2).

    For a valid filter W is orthogonal, so W @ s gives the coefficients and
    W.T @ coefficients gives the signal back.

    Raises:
        TransformError: If m is odd or below 4n.
    """
    n = bank.n
    _check_length(m, n)
    windows = _analysis_windows(m, n, BoundaryMode.PERIODIC)
    half = m // 2
    rows = np.repeat(np.arange(half), 2 * n).reshape(half, 2 * n)
    matrix = np.zeros((m, m), dtype=np.float64)
    np.add.at(matrix, (rows, windows), np.broadcast_to(bank.l_d.as_array()[::-1], windows.shape))
    np.add.at(
        matrix, (rows + half, windows), np.broadcast_to(bank.h_d.as_array()[::-1], windows.shape)
    )
    return matrix
