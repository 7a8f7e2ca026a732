"""Reference filters with known provenance.

Published vectors are stored as printed (four decimals for the table columns),
each with the residual budget its rounding allows. The Daubechies filters are
computed in closed form so they can also serve as precise banks.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

from wavegen.filterbank import Filter

# 4-decimal inputs: worst-case half-ulp accumulation over up to 2n products
ROUNDED_TOLERANCE = 2e-3


@dataclass(frozen=True)
class ReferenceEntry:
    """A named reference filter.

    Attributes:
        name: Unique identifier used by lookup() and the CLI --ref flag.
        taps: The decomposition low-pass filter.
        source: Where the coefficients come from.
        tolerance: Bound on the total absolute residual this entry meets.
    """

    name: str
    taps: Filter
    source: str
    tolerance: float


def _daubechies2() -> Filter:
    s3 = math.sqrt(3.0)
    d = 4.0 * math.sqrt(2.0)
    return Filter([(1 - s3) / d, (3 - s3) / d, (3 + s3) / d, (1 + s3) / d])


def _daubechies3() -> Filter:
    r = math.sqrt(10.0)
    q = math.sqrt(5.0 + 2.0 * r)
    d = 16.0 * math.sqrt(2.0)
    h = [
        (1 + r + q) / d,
        (5 + r + 3 * q) / d,
        (10 - 2 * r + 2 * q) / d,
        (10 - 2 * r - 2 * q) / d,
        (5 + r - 3 * q) / d,
        (1 + r - q) / d,
    ]
    return Filter(h[::-1])


_TABLE_COLUMNS: dict[int, list[float]] = {
    4: [0.2856, 0.3308, -0.2345, 0.2736, 0.1858, 0.5086, 0.4702, -0.4060],
    5: [-0.1033, -0.3900, 0.1541, -0.1268, 0.0538, -0.0284, -0.0284, -0.3693, -0.7832, 0.2075],
    6: [
        -0.5898, -0.6356, 0.0314, -0.1777, -0.2926, 0.1314,
        0.1024, 0.0530, 0.1706, -0.1982, -0.1292, 0.1199,
    ],
    7: [
        0.2234, -0.8473, -0.2672, 0.0400, -0.0054, 0.0682, -0.0561,
        0.0384, -0.0983, 0.0357, -0.2041, 0.0369, -0.2995, -0.0790,
    ],
    8: [
        -0.0021, -0.0010, 0.0659, 0.0397, 0.0351, -0.2904, 0.0667, 0.1552,
        -0.1573, 0.0316, -0.0071, 0.3433, 0.7973, 0.2286, -0.0913, 0.2000,
    ],
}

_CONVERGED_N8 = [
    0.5875, -0.0583, -0.1553, 0.0594, 0.2736, -0.0376, -0.0432, -0.1493,
    -0.0068, 0.4646, 0.0597, 0.5446, -0.0043, -0.0748, -0.0041, -0.0414,
]

_COIFLET1 = [
    -0.01565572813546454,
    -0.0727326195128539,
    0.38486484686420286,
    0.8525720202122554,
    0.3378976624578092,
    -0.0727326195128539,
]


@lru_cache(maxsize=1)
def _entries() -> tuple[ReferenceEntry, ...]:
    half = math.sqrt(2.0) / 2.0
    entries = [
        ReferenceEntry("haar", Filter([half, half]), "unique positive solution for n=1", 1e-15),
        ReferenceEntry("db2", _daubechies2(), "Daubechies 4-tap, closed form", 1e-14),
        ReferenceEntry("db3", _daubechies3(), "Daubechies 6-tap, closed form in radicals", 1e-14),
        ReferenceEntry(
            "db3-rounded",
            Filter([0.0352, -0.0854, -0.1350, 0.4599, 0.8069, 0.3327]),
            "Daubechies 6-tap, 4-decimal published rounding",
            5e-4,
        ),
        ReferenceEntry(
            "coif1", Filter(_COIFLET1), "Coiflet 6-tap, 16-digit published values", 1e-11
        ),
    ]
    for n, column in _TABLE_COLUMNS.items():
        entries.append(
            ReferenceEntry(
                f"table1-n{n}",
                Filter(column),
                f"published solution table, n={n} column, 4 decimals",
                ROUNDED_TOLERANCE,
            )
        )
    entries.append(
        ReferenceEntry(
            "fig2-n16taps",
            Filter(_CONVERGED_N8),
            "published converged n=8 solver output, 4 decimals",
            ROUNDED_TOLERANCE,
        )
    )
    return tuple(entries)


def catalog() -> list[ReferenceEntry]:
    """Return every reference entry, in a stable order."""
    return list(_entries())


def lookup(name: str) -> ReferenceEntry:
    """Find a reference entry by name.

    Raises:
        KeyError: If no entry has that name.
    """
    for entry in _entries():
        if entry.name == name:
            return entry
    raise KeyError(f"unknown reference filter: {name}")


def names() -> list[str]:
    return [entry.name for entry in _entries()]
