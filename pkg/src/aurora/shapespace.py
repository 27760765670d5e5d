"""Shape space for tongue contours: Procrustes alignment and tangent PCA.

Alignment removes translation, scale, and rotation, leaving pure shape.
Aligned shapes live on the unit pre-shape sphere; projecting into the
tangent space at the consensus linearizes them so ordinary PCA applies.
All vectorized shapes use the interleaved layout (x1, y1, ..., x11, y11),
i.e. reshape(11, 2).ravel() and back.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry
from .geometry import N_KNOTS

GPA_TOL = 1e-10
GPA_MAX_ITER = 100


@dataclass(frozen=True, eq=False)
class GpaResult:
    """Consensus shape and the superimposed configurations.

    mean_shape is centered, unit centroid size, and canonically oriented
    (vallecula-to-tip axis along +x). aligned has shape (n, 11, 2); each
    entry is the corresponding input's pre-shape rotated onto the consensus.
    """

    mean_shape: np.ndarray
    aligned: np.ndarray
    n_iterations: int
    converged: bool


@dataclass(frozen=True, eq=False)
class PcaModel:
    """Tangent-space principal components at a consensus shape.

    components is (22, 22), one unit component per row, eigenvalue order
    descending. eigenvalues are clamped at zero; tiny negative values from
    eigh round-off do not survive.
    """

    mean_shape: np.ndarray
    components: np.ndarray
    eigenvalues: np.ndarray
    n_samples: int

    def variance_ratio(self) -> np.ndarray:
        total = float(self.eigenvalues.sum())
        if total <= 0.0:
            return np.zeros_like(self.eigenvalues)
        return self.eigenvalues / total


def _canonical_rotation(consensus: np.ndarray) -> float:
    """Angle that brings the consensus knot1->knot11 axis onto +x."""
    axis = consensus[N_KNOTS - 1] - consensus[0]
    return -float(np.arctan2(axis[1], axis[0]))


def gpa_align(configs, tol: float = GPA_TOL, max_iter: int = GPA_MAX_ITER) -> GpaResult:
    """Generalized Procrustes alignment of landmark configurations.

    Each configuration is centered and scaled to unit centroid size, then
    iteratively rotated onto the running consensus. The consensus is the
    mean of the aligned shapes renormalized to unit size each pass;
    iteration stops when it moves less than tol (Frobenius norm) or after
    max_iter passes. Finally everything is rotated into the canonical
    orientation so the result does not depend on how the inputs happened
    to be posed.
    """
    configs = np.asarray(configs, dtype=np.float64)
    if configs.ndim != 3 or configs.shape[1:] != (N_KNOTS, 2):
        raise ValueError(f"expected (n, {N_KNOTS}, 2) configurations, got {configs.shape}")
    if configs.shape[0] < 1:
        raise ValueError("need at least one configuration")
    aligned = np.stack([geometry.to_preshape(c) for c in configs])

    consensus = aligned.mean(axis=0)
    consensus = consensus / geometry.centroid_size(consensus)
    converged = False
    n_iterations = 0
    for _ in range(max_iter):
        n_iterations += 1
        for i in range(aligned.shape[0]):
            theta = geometry.optimal_rotation_angle(aligned[i], consensus)
            aligned[i] = geometry.rotate(aligned[i], theta)
        new_consensus = aligned.mean(axis=0)
        new_consensus = new_consensus / geometry.centroid_size(new_consensus)
        shift = float(np.linalg.norm(new_consensus - consensus))
        consensus = new_consensus
        if shift < tol:
            converged = True
            break

    phi = _canonical_rotation(consensus)
    consensus = geometry.rotate(consensus, phi)
    for i in range(aligned.shape[0]):
        aligned[i] = geometry.rotate(aligned[i], phi)
        # one final exact superimposition onto the canonical consensus
        theta = geometry.optimal_rotation_angle(aligned[i], consensus)
        aligned[i] = geometry.rotate(aligned[i], theta)

    return GpaResult(
        mean_shape=geometry.frozen(consensus),
        aligned=geometry.frozen(aligned),
        n_iterations=n_iterations,
        converged=converged,
    )


def align_preshape(config: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Pre-shape of config rotated optimally onto target.

    Equivalent to what gpa_align would produce for this configuration once
    the consensus has settled at target.
    """
    pre = geometry.to_preshape(config)
    theta = geometry.optimal_rotation_angle(pre, np.asarray(target, dtype=np.float64))
    return geometry.rotate(pre, theta)


def tangent_project(aligned, mean_shape) -> np.ndarray:
    """Project aligned shapes into the tangent space at the consensus.

    v = flat(a) - <flat(a), flat(m)> flat(m), removing the component along
    the mean direction. Returns (n, 22); a single (11, 2) shape gives (22,).
    """
    arr = np.asarray(aligned, dtype=np.float64)
    single = arr.ndim == 2
    if single:
        arr = arr[None]
    flat = arr.reshape(arr.shape[0], 2 * N_KNOTS)
    m = np.asarray(mean_shape, dtype=np.float64).ravel()
    m = m / np.linalg.norm(m)
    coeffs = flat @ m
    vectors = flat - coeffs[:, None] * m[None, :]
    return vectors[0] if single else vectors


def fit_pca(vectors: np.ndarray, mean_shape: np.ndarray) -> PcaModel:
    """Eigendecomposition of the tangent-vector covariance (1/(n-1)).

    Tangent vectors at the GPA consensus have mean zero by construction,
    so the second-moment matrix is the covariance. Component signs follow
    the largest-magnitude-entry-positive convention to make them stable
    across runs and platforms.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim != 2 or vectors.shape[1] != 2 * N_KNOTS:
        raise ValueError(f"expected (n, {2 * N_KNOTS}) tangent vectors, got {vectors.shape}")
    n = vectors.shape[0]
    if n < 2:
        raise ValueError("need at least 2 shapes to estimate a covariance")
    cov = vectors.T @ vectors / (n - 1)
    eigenvalues, eigenvectors = np.linalg.eigh(cov)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = np.clip(eigenvalues[order], 0.0, None)
    components = eigenvectors[:, order].T
    for i in range(components.shape[0]):
        pivot = np.argmax(np.abs(components[i]))
        if components[i, pivot] < 0:
            components[i] = -components[i]
    return PcaModel(
        mean_shape=geometry.frozen(mean_shape),
        components=geometry.frozen(components),
        eigenvalues=geometry.frozen(eigenvalues),
        n_samples=n,
    )


def pca_scores(model: PcaModel, vectors: np.ndarray, n_components: int | None = None) -> np.ndarray:
    """Project tangent vectors onto the leading components."""
    comps = model.components if n_components is None else model.components[:n_components]
    return np.asarray(vectors, dtype=np.float64) @ comps.T


def pca_invert(model: PcaModel, scores: np.ndarray) -> np.ndarray:
    """Rebuild a shape from component scores: mean + sum(score_k * comp_k).

    Accepts (k,) for one shape or (n, k) for a batch; unspecified trailing
    components are taken as zero. The result lives near the pre-shape
    sphere (centered, approximately unit size), same space as mean_shape.
    """
    scores = np.asarray(scores, dtype=np.float64)
    single = scores.ndim == 1
    if single:
        scores = scores[None]
    k = scores.shape[1]
    flat = model.mean_shape.ravel()[None, :] + scores @ model.components[:k]
    shapes = flat.reshape(-1, N_KNOTS, 2)
    return shapes[0] if single else shapes
