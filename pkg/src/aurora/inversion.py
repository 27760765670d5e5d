"""Contour reconstruction: shape scores and endpoints back to a smooth curve.

Four stages: invert the tangent PCA at the predicted scores, anchor the
resulting unit shape onto the predicted vallecula/tip positions with a
two-endpoint similarity transform, then resample through a natural cubic
spline so 11 knots become a 100-point display contour. The knots
themselves pass through unchanged.
"""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from . import geometry, shapespace
from .errors import DegenerateGeometryError
from .geometry import N_KNOTS
from .regress import ModelBundle, predict_params
from .shapespace import PcaModel

N_CONTOUR_POINTS = 100

# 10 spline segments carry 89 interior samples: 9 per segment counted from
# the vallecula end, 8 in the last. Knots land at these sample indices.
KNOT_INDICES = np.array([0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 99])


def _parameter_samples() -> np.ndarray:
    ts = []
    for seg in range(N_KNOTS - 1):
        n_interior = 9 if seg < N_KNOTS - 2 else 8
        ts.append(float(seg))
        ts.extend(seg + j / (n_interior + 1) for j in range(1, n_interior + 1))
    ts.append(float(N_KNOTS - 1))
    return np.array(ts)


PARAMETER_SAMPLES = _parameter_samples()
assert PARAMETER_SAMPLES.shape == (N_CONTOUR_POINTS,)


@dataclass(frozen=True, eq=False)
class TongueContour:
    """100 ordered contour points in mm, vallecula end first.

    knot_indices marks where the 11 reconstruction knots sit inside
    points; those rows equal the knots exactly.
    """

    points: np.ndarray
    knot_indices: np.ndarray
    extrapolated: bool
    source_f1_hz: float
    source_f2_hz: float

    @property
    def knots(self) -> np.ndarray:
        return self.points[self.knot_indices]


def reconstruct_shape(pca: PcaModel, pc1: float, pc2: float) -> np.ndarray:
    """Invert the tangent PCA at two leading scores: an (11, 2) shape near
    the unit pre-shape sphere."""
    return shapespace.pca_invert(pca, np.array([pc1, pc2], dtype=np.float64))


def similarity_transform(
    shape: np.ndarray, target_knot1, target_knot11
) -> np.ndarray:
    """Anchor a reconstructed shape onto predicted endpoint positions.

    Scale and rotation come entirely from mapping the shape's own
    endpoint vector onto the target vector; the first and last knots land
    on the targets exactly.
    """
    return geometry.similarity_from_endpoints(shape, target_knot1, target_knot11)


def smooth_contour(
    knots,
    extrapolated: bool = False,
    source_f1_hz: float = 0.0,
    source_f2_hz: float = 0.0,
) -> TongueContour:
    """Natural cubic spline through the 11 knots, sampled at 100 parameters.

    x and y are interpolated independently against the knot index. The
    rows at knot_indices are overwritten with the input knots so they
    match bit for bit.
    """
    knots = geometry.as_configuration(knots)
    t_knots = np.arange(N_KNOTS, dtype=np.float64)
    spline = CubicSpline(t_knots, knots, bc_type="natural", axis=0)
    points = spline(PARAMETER_SAMPLES)
    points[KNOT_INDICES] = knots
    return TongueContour(
        points=geometry.frozen(points),
        knot_indices=geometry.frozen(KNOT_INDICES).astype(np.intp),
        extrapolated=bool(extrapolated),
        source_f1_hz=float(source_f1_hz),
        source_f2_hz=float(source_f2_hz),
    )


def invert(bundle: ModelBundle, f1_hz: float, f2_hz: float) -> TongueContour:
    """Full pipeline: formants to display contour."""
    if not (f1_hz > 0 and f2_hz > 0):
        raise ValueError(f"formants must be positive, got ({f1_hz}, {f2_hz})")
    params = predict_params(bundle.regression, f1_hz, f2_hz)
    shape = reconstruct_shape(bundle.pca, params.scores[0], params.scores[1])
    try:
        knots = similarity_transform(shape, params.knot1, params.knot11)
    except DegenerateGeometryError as exc:
        raise DegenerateGeometryError(
            f"degenerate endpoint prediction at F1={f1_hz:.1f} Hz, F2={f2_hz:.1f} Hz: {exc}"
        ) from None
    return smooth_contour(
        knots,
        extrapolated=params.extrapolated,
        source_f1_hz=f1_hz,
        source_f2_hz=f2_hz,
    )


def grid_predict(
    bundle: ModelBundle,
    f1_lo: float | None = None,
    f1_hi: float | None = None,
    f2_lo: float | None = None,
    f2_hi: float | None = None,
    steps: int = 4,
) -> list[list[TongueContour]]:
    """Contours over an evenly spaced formant grid, rows indexed by F1.

    Range endpoints default to the model's stored training quantiles.
    """
    if steps < 2:
        raise ValueError("steps must be >= 2")
    reg = bundle.regression
    f1_lo = float(reg.f1_range[0]) if f1_lo is None else float(f1_lo)
    f1_hi = float(reg.f1_range[1]) if f1_hi is None else float(f1_hi)
    f2_lo = float(reg.f2_range[0]) if f2_lo is None else float(f2_lo)
    f2_hi = float(reg.f2_range[1]) if f2_hi is None else float(f2_hi)
    f1_values = np.linspace(f1_lo, f1_hi, steps)
    f2_values = np.linspace(f2_lo, f2_hi, steps)
    return [[invert(bundle, f1, f2) for f2 in f2_values] for f1 in f1_values]


def highest_point(contour: TongueContour) -> np.ndarray:
    """The contour point with maximal y, used for qualitative trend checks."""
    return contour.points[int(np.argmax(contour.points[:, 1]))]


def vertical_span(contour: TongueContour) -> float:
    ys = contour.points[:, 1]
    return float(ys.max() - ys.min())


@dataclass(frozen=True, eq=False)
class ItemEvalRow:
    item: str
    mean_f1_hz: float
    mean_f2_hz: float
    mean_contour: TongueContour
    predicted_contour: TongueContour
    per_knot_rmsd_mm: float


def evaluate_item_means(bundle: ModelBundle, corpus) -> list[ItemEvalRow]:
    """Model fit per item: predict at the item's mean formants and compare
    with the smoothed mean observed knots, RMSD over the 11 knots."""
    from .corpus import item_means

    rows = []
    for summary in item_means(corpus):
        predicted = invert(bundle, summary.mean_f1_hz, summary.mean_f2_hz)
        observed = smooth_contour(
            summary.mean_knots,
            source_f1_hz=summary.mean_f1_hz,
            source_f2_hz=summary.mean_f2_hz,
        )
        diff = predicted.knots - observed.knots
        rmsd = float(np.sqrt(np.mean(np.sum(diff**2, axis=1))))
        rows.append(
            ItemEvalRow(
                item=summary.item,
                mean_f1_hz=summary.mean_f1_hz,
                mean_f2_hz=summary.mean_f2_hz,
                mean_contour=observed,
                predicted_contour=predicted,
                per_knot_rmsd_mm=rmsd,
            )
        )
    return rows


def contour_to_csv(contour: TongueContour) -> str:
    """100 rows of index, x_mm, y_mm, is_knot."""
    out = io.StringIO()
    out.write("index,x_mm,y_mm,is_knot\n")
    knot_set = set(int(i) for i in contour.knot_indices)
    for i, (x, y) in enumerate(contour.points):
        out.write(f"{i},{float(x)!r},{float(y)!r},{1 if i in knot_set else 0}\n")
    return out.getvalue()
