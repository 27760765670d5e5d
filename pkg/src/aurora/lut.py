"""Dense formant-grid lookup table for constant-time contour queries.

The full inversion pipeline is precompiled over an (F1, F2) grid; live
queries bilinearly blend the four surrounding node contours. File format
(little-endian):

    offset  size  field
    0       4     magic b"AURL"
    4       4     u32 format version (currently 1)
    8       32    SHA-256 of the source model bundle JSON
    40      4     u32 n1 (F1 axis length)
    44      4     u32 n2 (F2 axis length)
    48      24    f64 f1_lo, f1_hi, f1_step
    72      24    f64 f2_lo, f2_hi, f2_step
    96      -     f64 contour payload, shape (n1, n2, 100, 2), row-major

Axis values are lo + step*i; when the range is not a whole number of
steps the final value is clamped to hi, so the last interval may be
short. Contours are stored at full f64 so a compile, save, load cycle
changes nothing.
"""
from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

from . import geometry
from .errors import (
    GridTooLargeError,
    LutHeaderError,
    LutTruncatedError,
    LutVersionError,
)
from .inversion import KNOT_INDICES, N_CONTOUR_POINTS, TongueContour, invert
from .regress import ModelBundle, bundle_to_json

LUT_MAGIC = b"AURL"
LUT_VERSION = 1
HEADER_SIZE = 96
DEFAULT_STEP_HZ = 10.0
CELL_CAP = 500_000

_HEADER_STRUCT = struct.Struct("<4sI32sII6d")
assert _HEADER_STRUCT.size == HEADER_SIZE


@dataclass(frozen=True)
class LutHeader:
    version: int
    model_digest: str
    n1: int
    n2: int
    f1_lo: float
    f1_hi: float
    f1_step: float
    f2_lo: float
    f2_hi: float
    f2_step: float


@dataclass(frozen=True, eq=False)
class LookupTable:
    header: LutHeader
    f1_axis: np.ndarray
    f2_axis: np.ndarray
    contours: np.ndarray

    @property
    def model_digest(self) -> str:
        return self.header.model_digest


def bundle_digest(bundle: ModelBundle) -> str:
    return hashlib.sha256(bundle_to_json(bundle).encode("utf-8")).hexdigest()


def _axis(lo: float, hi: float, step: float) -> np.ndarray:
    if not (np.isfinite(lo) and np.isfinite(hi)) or hi <= lo:
        raise ValueError(f"degenerate axis range [{lo}, {hi}]")
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    n_whole = int(np.floor((hi - lo) / step + 1e-9))
    values = lo + step * np.arange(n_whole + 1)
    if values[-1] < hi - 1e-9:
        values = np.append(values, hi)
    else:
        values[-1] = min(values[-1], hi)
    return values


def compile_lut(
    bundle: ModelBundle,
    f1_lo: float | None = None,
    f1_hi: float | None = None,
    f2_lo: float | None = None,
    f2_hi: float | None = None,
    step: float = DEFAULT_STEP_HZ,
    cell_cap: int = CELL_CAP,
) -> LookupTable:
    """Run the inversion at every grid node. Ranges default to the model's
    training quantiles; grids over cell_cap nodes are refused."""
    reg = bundle.regression
    f1_lo = float(reg.f1_range[0]) if f1_lo is None else float(f1_lo)
    f1_hi = float(reg.f1_range[1]) if f1_hi is None else float(f1_hi)
    f2_lo = float(reg.f2_range[0]) if f2_lo is None else float(f2_lo)
    f2_hi = float(reg.f2_range[1]) if f2_hi is None else float(f2_hi)
    f1_axis = _axis(f1_lo, f1_hi, step)
    f2_axis = _axis(f2_lo, f2_hi, step)
    n1, n2 = len(f1_axis), len(f2_axis)
    if n1 * n2 > cell_cap:
        raise GridTooLargeError(
            f"{n1} x {n2} = {n1 * n2} cells exceeds the cap of {cell_cap}; "
            f"use a larger step than {step} Hz"
        )
    contours = np.empty((n1, n2, N_CONTOUR_POINTS, 2))
    for i, f1 in enumerate(f1_axis):
        for j, f2 in enumerate(f2_axis):
            contours[i, j] = invert(bundle, float(f1), float(f2)).points
    header = LutHeader(
        version=LUT_VERSION,
        model_digest=bundle_digest(bundle),
        n1=n1,
        n2=n2,
        f1_lo=f1_lo,
        f1_hi=f1_hi,
        f1_step=float(step),
        f2_lo=f2_lo,
        f2_hi=f2_hi,
        f2_step=float(step),
    )
    return LookupTable(
        header=header,
        f1_axis=geometry.frozen(f1_axis),
        f2_axis=geometry.frozen(f2_axis),
        contours=geometry.frozen(contours),
    )


def _cell(axis: np.ndarray, value: float) -> tuple[int, float, bool]:
    """Clamp value onto the axis: (lower node index, blend weight, clamped).

    Values at or beyond either end collapse to the end node with weight 0,
    so hull queries reuse the stored contours exactly.
    """
    if value <= axis[0]:
        return 0, 0.0, value < axis[0]
    if value >= axis[-1]:
        return len(axis) - 1, 0.0, value > axis[-1]
    i = int(np.searchsorted(axis, value, side="right")) - 1
    t = (value - axis[i]) / (axis[i + 1] - axis[i])
    return i, float(t), False


def query_lut(table: LookupTable, f1_hz: float, f2_hz: float) -> TongueContour:
    """Bilinear blend of the four surrounding node contours.

    Out-of-range formants are clamped to the grid hull and the result is
    flagged extrapolated. An exact node hit returns the stored contour
    unchanged.
    """
    f1_hz, f2_hz = float(f1_hz), float(f2_hz)
    i, t1, c1 = _cell(table.f1_axis, f1_hz)
    j, t2, c2 = _cell(table.f2_axis, f2_hz)
    if t1 == 0.0 and t2 == 0.0:
        points = table.contours[i, j]  # stored node contour, no copy
    elif t1 == 0.0:
        points = (1.0 - t2) * table.contours[i, j] + t2 * table.contours[i, j + 1]
    elif t2 == 0.0:
        points = (1.0 - t1) * table.contours[i, j] + t1 * table.contours[i + 1, j]
    else:
        points = (1.0 - t1) * (1.0 - t2) * table.contours[i, j]
        points += (1.0 - t1) * t2 * table.contours[i, j + 1]
        points += t1 * (1.0 - t2) * table.contours[i + 1, j]
        points += t1 * t2 * table.contours[i + 1, j + 1]
    return TongueContour(
        points=points,
        knot_indices=KNOT_INDICES,
        extrapolated=bool(c1 or c2),
        source_f1_hz=f1_hz,
        source_f2_hz=f2_hz,
    )


# ---------------------------------------------------------------------------
# Binary persistence
# ---------------------------------------------------------------------------

def _pack_header(h: LutHeader) -> bytes:
    return _HEADER_STRUCT.pack(
        LUT_MAGIC,
        h.version,
        bytes.fromhex(h.model_digest),
        h.n1,
        h.n2,
        h.f1_lo,
        h.f1_hi,
        h.f1_step,
        h.f2_lo,
        h.f2_hi,
        h.f2_step,
    )


def _unpack_header(raw: bytes) -> LutHeader:
    if len(raw) < HEADER_SIZE:
        raise LutTruncatedError(
            f"file too short for the {HEADER_SIZE}-byte header, got {len(raw)} bytes"
        )
    magic, version, digest, n1, n2, f1_lo, f1_hi, f1_step, f2_lo, f2_hi, f2_step = (
        _HEADER_STRUCT.unpack(raw[:HEADER_SIZE])
    )
    if magic != LUT_MAGIC:
        raise LutHeaderError(f"bad magic {magic!r}, expected {LUT_MAGIC!r}")
    if version != LUT_VERSION:
        raise LutVersionError(f"unsupported format version {version}")
    header = LutHeader(
        version=version,
        model_digest=digest.hex(),
        n1=n1,
        n2=n2,
        f1_lo=f1_lo,
        f1_hi=f1_hi,
        f1_step=f1_step,
        f2_lo=f2_lo,
        f2_hi=f2_hi,
        f2_step=f2_step,
    )
    if n1 < 2 or n2 < 2:
        raise LutHeaderError(f"grid dimensions {n1} x {n2} are too small")
    for lo, hi, step in ((f1_lo, f1_hi, f1_step), (f2_lo, f2_hi, f2_step)):
        if not (np.isfinite(lo) and np.isfinite(hi) and np.isfinite(step)):
            raise LutHeaderError("non-finite axis parameters")
        if hi <= lo or step <= 0:
            raise LutHeaderError(f"inconsistent axis parameters [{lo}, {hi}] step {step}")
    if len(_axis(f1_lo, f1_hi, f1_step)) != n1 or len(_axis(f2_lo, f2_hi, f2_step)) != n2:
        raise LutHeaderError("grid dimensions do not match the axis parameters")
    return header


def save_lut(table: LookupTable, path) -> None:
    with open(path, "wb") as fh:
        fh.write(_pack_header(table.header))
        fh.write(np.ascontiguousarray(table.contours, dtype="<f8").tobytes())


def read_lut_header(path) -> LutHeader:
    """Inspect axes and digest from the fixed-size header without touching
    the contour payload."""
    with open(path, "rb") as fh:
        return _unpack_header(fh.read(HEADER_SIZE))


def load_lut(path) -> LookupTable:
    with open(path, "rb") as fh:
        raw = fh.read()
    header = _unpack_header(raw)
    expected = header.n1 * header.n2 * N_CONTOUR_POINTS * 2 * 8
    payload = raw[HEADER_SIZE:]
    if len(payload) != expected:
        raise LutTruncatedError(
            f"payload is {len(payload)} bytes, expected {expected} "
            f"for a {header.n1} x {header.n2} grid"
        )
    contours = np.frombuffer(payload, dtype="<f8").reshape(
        header.n1, header.n2, N_CONTOUR_POINTS, 2
    )
    return LookupTable(
        header=header,
        f1_axis=geometry.frozen(_axis(header.f1_lo, header.f1_hi, header.f1_step)),
        f2_axis=geometry.frozen(_axis(header.f2_lo, header.f2_hi, header.f2_step)),
        contours=geometry.frozen(contours),
    )
