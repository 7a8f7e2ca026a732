"""Readers and writers for bank JSON, DRC1 coefficient containers, CSV and PGM files.

Every writer goes through an atomic temp-file-and-rename, so a failed run never
leaves a truncated output behind. Malformed input raises FormatError; missing
or unreadable files raise OSError.
"""

import csv
import io
import json
import math
import re
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np

from wavegen.errors import FilterError, FormatError
from wavegen.filterbank import Filter, constraint_residuals
from wavegen.solver import ConvergenceTrace, TraceRecord
from wavegen.transform import PLANES, BoundaryMode, Decomposition1D, Decomposition2D
from wavegen.utils import atomic_write_bytes, atomic_write_text

BANK_FORMAT = "wavegen-bank/1"
DRC_MAGIC = b"DRC1"
DRC_VERSION = 1
_DRC_HEADER = struct.Struct("<4sIIIIB")
TRACE_HEADER = ["sweep", "lyapunov", "total_abs_residual"]


# Bank JSON


@dataclass(frozen=True)
class BankFile:
    """Contents of a bank file. Derived filters are never stored."""

    l_d: Filter
    name: Optional[str] = None
    residual_total_abs: Optional[float] = None
    converged: Optional[bool] = None


def bank_to_json(l_d: Filter, name: Optional[str] = None, converged: Optional[bool] = None) -> str:
    document: dict[str, Any] = {"format": BANK_FORMAT, "n": l_d.n, "l_d": list(l_d.taps)}
    if name is not None:
        document["name"] = name
    document["residual_total_abs"] = constraint_residuals(l_d).total_abs
    if converged is not None:
        document["converged"] = converged
    return json.dumps(document, indent=2) + "\n"


def parse_bank(text: str) -> BankFile:
    """Parse and validate a bank document.

    Raises:
        FormatError: On invalid JSON, a wrong format tag, or taps that do not
            match n.
    """
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"bank file is not valid JSON: {e}") from None
    if not isinstance(document, dict) or document.get("format") != BANK_FORMAT:
        raise FormatError(f"bank file must declare format {BANK_FORMAT!r}")
    n = document.get("n")
    taps = document.get("l_d")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise FormatError(f"bank field n must be a positive integer, got {n!r}")
    if not isinstance(taps, list) or not all(
        isinstance(t, (int, float)) and not isinstance(t, bool) for t in taps
    ):
        raise FormatError("bank field l_d must be an array of numbers")
    if len(taps) != 2 * n:
        raise FormatError(f"bank has {len(taps)} taps but n={n} needs {2 * n}")
    try:
        l_d = Filter(taps)
    except FilterError as e:
        raise FormatError(str(e)) from None
    name = document.get("name")
    total = document.get("residual_total_abs")
    converged = document.get("converged")
    return BankFile(
        l_d=l_d,
        name=name if isinstance(name, str) else None,
        residual_total_abs=float(total) if isinstance(total, (int, float)) else None,
        converged=converged if isinstance(converged, bool) else None,
    )


def save_bank(
    path: str | Path,
    l_d: Filter,
    name: Optional[str] = None,
    converged: Optional[bool] = None,
) -> Path:
    return atomic_write_text(path, bank_to_json(l_d, name=name, converged=converged))


def load_bank(path: str | Path) -> BankFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError:
        raise FormatError(f"bank file is not UTF-8: {path}") from None
    return parse_bank(text)


# DRC1 coefficient container


@dataclass(frozen=True)
class Container:
    """A decoded DRC1 container.

    A 1D decomposition is stored with rows == 1: `main` holds p and
    `horizontal` holds q, each 1 x m/2, while `vertical` and `diagonal` are empty.
    """

    n: int
    mode: BoundaryMode
    rows: int
    cols: int
    planes: dict[str, np.ndarray]

    @property
    def is_1d(self) -> bool:
        return self.rows == 1

    @classmethod
    def from_2d(cls, d: Decomposition2D, n: int) -> "Container":
        return cls(n=n, mode=d.mode, rows=d.rows, cols=d.cols, planes=d.planes())

    @classmethod
    def from_1d(cls, d: Decomposition1D, n: int) -> "Container":
        empty = np.zeros((0, 0), dtype=np.float64)
        planes = {
            "main": d.p.reshape(1, -1),
            "horizontal": d.q.reshape(1, -1),
            "vertical": empty,
            "diagonal": empty,
        }
        return cls(n=n, mode=d.mode, rows=1, cols=d.m, planes=planes)

    def to_2d(self) -> Decomposition2D:
        if self.is_1d:
            raise FormatError("container holds a 1D decomposition")
        return Decomposition2D(mode=self.mode, rows=self.rows, cols=self.cols, **self.planes)

    def to_1d(self) -> Decomposition1D:
        if not self.is_1d:
            raise FormatError("container holds a 2D decomposition")
        return Decomposition1D(
            p=self.planes["main"].ravel(),
            q=self.planes["horizontal"].ravel(),
            mode=self.mode,
            m=self.cols,
        )


def _plane_shapes(rows: int, cols: int) -> dict[str, tuple[int, int]]:
    if rows == 1:
        return {
            "main": (1, cols // 2),
            "horizontal": (1, cols // 2),
            "vertical": (0, 0),
            "diagonal": (0, 0),
        }
    return {name: (rows // 2, cols // 2) for name in PLANES}


def encode_container(container: Container) -> bytes:
    header = _DRC_HEADER.pack(
        DRC_MAGIC,
        DRC_VERSION,
        container.n,
        container.rows,
        container.cols,
        int(container.mode),
    )
    shapes = _plane_shapes(container.rows, container.cols)
    chunks = [header]
    for name in PLANES:
        plane = np.ascontiguousarray(container.planes[name], dtype="<f8")
        if plane.size != shapes[name][0] * shapes[name][1]:
            raise FormatError(f"{name} plane has {plane.size} values, expected {shapes[name]}")
        chunks.append(plane.tobytes())
    return b"".join(chunks)


def decode_container(data: bytes) -> Container:
    """Decode DRC1 bytes.

    Raises:
        FormatError: On a wrong magic, unsupported version, unknown mode, odd
            dimensions, or a payload of the wrong size.
    """
    if len(data) < _DRC_HEADER.size:
        raise FormatError("container is shorter than its header")
    magic, version, n, rows, cols, mode = _DRC_HEADER.unpack_from(data)
    if magic != DRC_MAGIC:
        raise FormatError(f"bad container magic {magic!r}, expected {DRC_MAGIC!r}")
    if version != DRC_VERSION:
        raise FormatError(f"unsupported container version {version}")
    try:
        boundary = BoundaryMode(mode)
    except ValueError:
        raise FormatError(f"unknown boundary mode code {mode}") from None
    if n < 1 or cols % 2 or (rows != 1 and rows % 2):
        raise FormatError(f"invalid container dimensions n={n} rows={rows} cols={cols}")
    shapes = _plane_shapes(rows, cols)
    expected = _DRC_HEADER.size + 8 * sum(r * c for r, c in shapes.values())
    if len(data) != expected:
        raise FormatError(f"container has {len(data)} bytes, expected {expected}")
    planes = {}
    offset = _DRC_HEADER.size
    for name in PLANES:
        count = shapes[name][0] * shapes[name][1]
        if count == 0:
            planes[name] = np.zeros(shapes[name], dtype=np.float64)
            continue
        values = np.frombuffer(data, dtype="<f8", count=count, offset=offset)
        planes[name] = values.astype(np.float64).reshape(shapes[name])
        offset += 8 * count
    return Container(n=n, mode=boundary, rows=rows, cols=cols, planes=planes)


def save_container(path: str | Path, container: Container) -> Path:
    return atomic_write_bytes(path, encode_container(container))


def load_container(path: str | Path) -> Container:
    return decode_container(Path(path).read_bytes())


# CSV signals and convergence traces


def _format_float(value: float) -> str:
    return f"{value:.17g}"


def write_trace(path: str | Path, trace: ConvergenceTrace) -> Path:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    for record in trace.records:
        writer.writerow(
            [record.sweep, _format_float(record.lyapunov), _format_float(record.total_abs)]
        )
    return atomic_write_text(path, buffer.getvalue())


def read_trace(path: str | Path) -> list[TraceRecord]:
    """Read a trace CSV back into records.

    Raises:
        FormatError: On a wrong header or unparsable row.
    """
    with open(path, newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    if not rows or rows[0] != TRACE_HEADER:
        raise FormatError(f"trace file must start with header {','.join(TRACE_HEADER)}")
    records = []
    for line_number, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        try:
            sweep, lyap, total = row
            records.append(TraceRecord(int(sweep), float(lyap), float(total)))
        except ValueError:
            raise FormatError(f"bad trace row at line {line_number}: {row}") from None
    return records


def read_signal(path: str | Path) -> np.ndarray:
    """Read one sample per line; blank lines are ignored.

    Raises:
        FormatError: If a line is not a finite number.
    """
    samples = []
    with open(path, encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                value = float(text)
            except ValueError:
                raise FormatError(f"line {line_number} is not a number: {text!r}") from None
            if not math.isfinite(value):
                raise FormatError(f"line {line_number} is not finite: {text!r}")
            samples.append(value)
    return np.array(samples, dtype=np.float64)


def write_signal(path: str | Path, samples: np.ndarray) -> Path:
    text = "".join(f"{_format_float(float(v))}\n" for v in np.asarray(samples).ravel())
    return atomic_write_text(path, text)


# PGM images

_PGM_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def decode_pgm(data: bytes) -> np.ndarray:
    """Decode a P2 (plain) or P5 (binary) PGM into float64 pixel values.

    Values keep their stored range; no rescaling is applied.

    Raises:
        FormatError: On an unknown magic, bad header or short pixel data.
    """
    header: list[bytes] = []
    position = 0
    while len(header) < 4:
        match = _PGM_TOKEN.match(data, position)
        if match is None:
            raise FormatError("PGM header is incomplete")
        header.append(match.group(1))
        position = match.end()
    magic = header[0]
    if magic not in (b"P2", b"P5"):
        raise FormatError(f"not a PGM file (magic {magic!r})")
    try:
        width, height, maxval = (int(token) for token in header[1:])
    except ValueError:
        raise FormatError("PGM header fields must be integers") from None
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise FormatError(f"invalid PGM header {width}x{height} maxval={maxval}")
    count = width * height

    if magic == b"P5":
        dtype = np.dtype("u1") if maxval < 256 else np.dtype(">u2")
        # exactly one whitespace byte separates the header from the raster
        start = position + 1
        raster = data[start : start + count * dtype.itemsize]
        if len(raster) != count * dtype.itemsize:
            raise FormatError("PGM raster is shorter than width * height")
        pixels = np.frombuffer(raster, dtype=dtype)
    else:
        body = re.sub(rb"#[^\n]*", b"", data[position:]).split()
        if len(body) < count:
            raise FormatError("PGM raster is shorter than width * height")
        try:
            pixels = np.array([int(token) for token in body[:count]], dtype=np.int64)
        except ValueError:
            raise FormatError("PGM raster contains a non-integer value") from None
    if np.any(pixels < 0):
        raise FormatError("PGM pixel is negative")
    if np.any(pixels > maxval):
        raise FormatError("PGM pixel exceeds maxval")
    return pixels.astype(np.float64).reshape(height, width)


def read_pgm(path: str | Path) -> np.ndarray:
    return decode_pgm(Path(path).read_bytes())


def encode_pgm(pixels: np.ndarray) -> bytes:
    """Encode as binary P5 with maxval 255, rounding and clipping values."""
    image = np.asarray(pixels, dtype=np.float64)
    if image.ndim != 2:
        raise FormatError(f"PGM images are two-dimensional, got shape {image.shape}")
    raster = np.clip(np.rint(image), 0, 255).astype(np.uint8)
    height, width = raster.shape
    return f"P5\n{width} {height}\n255\n".encode("ascii") + raster.tobytes()


def write_pgm(path: str | Path, pixels: np.ndarray) -> Path:
    return atomic_write_bytes(path, encode_pgm(pixels))


def preview_plane(plane: np.ndarray) -> tuple[np.ndarray, float, float]:
    """Map a coefficient plane affinely onto 0..255 for viewing.

    Returns:
        (pixels, offset, scale) with pixels = (plane - offset) * scale. A flat
        plane gets scale 0.
    """
    values = np.asarray(plane, dtype=np.float64)
    offset = float(values.min()) if values.size else 0.0
    span = float(values.max()) - offset if values.size else 0.0
    scale = 255.0 / span if span > 0 else 0.0
    return (values - offset) * scale, offset, scale
