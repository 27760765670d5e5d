"""Planar landmark geometry shared by the shape-space and reconstruction code.

A configuration is an (n, 2) float array of ordered landmarks. Throughout
the toolkit n is 11, with landmark 0 at the epiglottic vallecula end and
landmark 10 at the tongue tip.
"""
from __future__ import annotations

import numpy as np

from .errors import DegenerateGeometryError

N_KNOTS = 11

_DEGENERATE_EPS = 1e-9


def as_configuration(points, n_points: int = N_KNOTS) -> np.ndarray:
    """Coerce to an (n_points, 2) float64 array, rejecting non-finite input."""
    arr = np.asarray(points, dtype=np.float64)
    if arr.shape != (n_points, 2):
        raise ValueError(f"expected shape ({n_points}, 2), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("configuration contains non-finite coordinates")
    return arr


def centroid(config: np.ndarray) -> np.ndarray:
    return np.asarray(config, dtype=np.float64).mean(axis=0)


def centroid_size(config: np.ndarray) -> float:
    """Root sum of squared coordinates about the centroid."""
    c = np.asarray(config, dtype=np.float64)
    return float(np.linalg.norm(c - c.mean(axis=0)))


def to_preshape(config: np.ndarray) -> np.ndarray:
    """Center to zero centroid and scale to unit centroid size."""
    c = np.asarray(config, dtype=np.float64)
    centered = c - c.mean(axis=0)
    size = np.linalg.norm(centered)
    if size < _DEGENERATE_EPS:
        raise DegenerateGeometryError("configuration has near-zero centroid size")
    return centered / size


def rotation_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def optimal_rotation_angle(source: np.ndarray, target: np.ndarray) -> float:
    """Angle of the rotation (no reflection) that best maps source onto target.

    Both inputs must already be centered. Maximizes sum_j R(theta) s_j . t_j,
    so theta = atan2(sum cross, sum dot).
    """
    dot = float(np.sum(source * target))
    cross = float(np.sum(source[:, 0] * target[:, 1] - source[:, 1] * target[:, 0]))
    return float(np.arctan2(cross, dot))


def rotate(config: np.ndarray, theta: float) -> np.ndarray:
    return config @ rotation_matrix(theta).T


def similarity_from_endpoints(
    shape: np.ndarray, target_first: np.ndarray, target_last: np.ndarray
) -> np.ndarray:
    """Scale, rotate, and translate ``shape`` so its first and last landmarks
    land exactly on the two targets.

    The transform is determined entirely by the endpoint vectors: scale is
    the ratio of their lengths, rotation the difference of their angles,
    applied about the first landmark, then translated onto target_first.
    """
    shape = np.asarray(shape, dtype=np.float64)
    t1 = np.asarray(target_first, dtype=np.float64)
    t11 = np.asarray(target_last, dtype=np.float64)
    v_rec = shape[-1] - shape[0]
    v_ref = t11 - t1
    len_rec = np.linalg.norm(v_rec)
    len_ref = np.linalg.norm(v_ref)
    if len_rec < _DEGENERATE_EPS:
        raise DegenerateGeometryError("shape endpoints coincide")
    if len_ref < _DEGENERATE_EPS:
        raise DegenerateGeometryError("target endpoints coincide")
    scale = len_ref / len_rec
    theta = np.arctan2(v_ref[1], v_ref[0]) - np.arctan2(v_rec[1], v_rec[0])
    return scale * (shape - shape[0]) @ rotation_matrix(theta).T + t1


def frozen(arr: np.ndarray) -> np.ndarray:
    """Return a read-only view-safe copy, used to keep dataclasses immutable."""
    out = np.array(arr, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out
