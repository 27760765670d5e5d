"""Formant-to-articulation regression and model bundle persistence.

Six articulatory targets are regressed on the design (1, F1, F2, F1*F2):
the two endpoint landmark positions in speaker-centered mm (vallecula
knot1_x/y, tip knot11_x/y) and the first two tangent-PCA shape scores.
Predictor columns are standardized before the least-squares solve for
conditioning, then the fit is folded back into raw-Hz coefficients.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import geometry, shapespace
from .corpus import Corpus, center_by_speaker, corpus_digest
from .errors import ModelFormatError, UnderdeterminedError
from .shapespace import PcaModel

BUNDLE_FORMAT = "aurora-model/1"
N_PREDICTORS = 4
N_TARGETS = 6
N_SHAPE_SCORES = 2
TARGET_NAMES = ("knot1_x", "knot1_y", "knot11_x", "knot11_y", "pc1", "pc2")

# formants this far outside the training quantile band get flagged
EXTRAP_LOW_FACTOR = 0.8
EXTRAP_HIGH_FACTOR = 1.25
RANGE_QUANTILES = (0.05, 0.95)


@dataclass(frozen=True, eq=False)
class ArticulatoryParams:
    """Predicted articulation for one formant pair: endpoint positions in
    mm and two shape scores, plus whether the formants sat outside the
    model's trusted range."""

    knot1: np.ndarray
    knot11: np.ndarray
    scores: np.ndarray
    extrapolated: bool


@dataclass(frozen=True, eq=False)
class RegressionModel:
    coefficients: np.ndarray
    residual_variance: np.ndarray
    r_squared: np.ndarray
    f1_range: np.ndarray
    f2_range: np.ndarray
    n_tokens: int


@dataclass(frozen=True, eq=False)
class ModelBundle:
    pca: PcaModel
    regression: RegressionModel
    corpus_digest: str


def build_design(f1_hz, f2_hz) -> np.ndarray:
    """Design row(s) (1, F1, F2, F1*F2). Scalars give (4,), arrays (n, 4)."""
    f1 = np.asarray(f1_hz, dtype=np.float64)
    f2 = np.asarray(f2_hz, dtype=np.float64)
    return np.stack([np.ones_like(f1), f1, f2, f1 * f2], axis=-1)


def fit_regression(corpus: Corpus, pca: PcaModel) -> RegressionModel:
    """Least squares of the six articulatory targets on the formant design.

    The corpus must be speaker-centered so endpoint positions are
    comparable across speakers. Shape scores come from rotating each
    token's pre-shape onto the PCA consensus and projecting into its
    tangent space.
    """
    if not corpus.centered:
        raise ValueError("fit_regression requires a centered corpus")
    n = len(corpus.records)
    if n < N_PREDICTORS + 1:
        raise UnderdeterminedError(
            f"{n} token(s) cannot constrain {N_PREDICTORS} coefficients; need at least "
            f"{N_PREDICTORS + 1}"
        )
    f1 = np.array([r.f1_hz for r in corpus.records])
    f2 = np.array([r.f2_hz for r in corpus.records])
    design = build_design(f1, f2)

    targets = np.empty((n, N_TARGETS))
    for i, rec in enumerate(corpus.records):
        aligned = shapespace.align_preshape(rec.knots, pca.mean_shape)
        vector = shapespace.tangent_project(aligned, pca.mean_shape)
        scores = shapespace.pca_scores(pca, vector[None, :], n_components=N_SHAPE_SCORES)[0]
        targets[i, 0:2] = rec.knots[0]
        targets[i, 2:4] = rec.knots[-1]
        targets[i, 4:6] = scores

    # standardize all but the intercept column, solve, fold back to raw Hz
    mu = design[:, 1:].mean(axis=0)
    sd = design[:, 1:].std(axis=0)
    sd = np.where(sd > 0.0, sd, 1.0)
    z = np.ones_like(design)
    z[:, 1:] = (design[:, 1:] - mu) / sd
    beta_z, *_ = np.linalg.lstsq(z, targets, rcond=None)
    coefficients = np.empty_like(beta_z)
    coefficients[1:] = beta_z[1:] / sd[:, None]
    coefficients[0] = beta_z[0] - (mu / sd) @ beta_z[1:]

    residuals = targets - design @ coefficients
    residual_variance = np.mean(residuals**2, axis=0)
    ss_res = np.sum(residuals**2, axis=0)
    ss_tot = np.sum((targets - targets.mean(axis=0)) ** 2, axis=0)
    r_squared = np.where(ss_tot > 0.0, 1.0 - ss_res / np.where(ss_tot > 0.0, ss_tot, 1.0), 1.0)

    return RegressionModel(
        coefficients=geometry.frozen(coefficients),
        residual_variance=geometry.frozen(residual_variance),
        r_squared=geometry.frozen(r_squared),
        f1_range=geometry.frozen(np.quantile(f1, RANGE_QUANTILES)),
        f2_range=geometry.frozen(np.quantile(f2, RANGE_QUANTILES)),
        n_tokens=n,
    )


def is_extrapolated(model: RegressionModel, f1_hz: float, f2_hz: float) -> bool:
    lo1, hi1 = model.f1_range
    lo2, hi2 = model.f2_range
    return bool(
        f1_hz < EXTRAP_LOW_FACTOR * lo1
        or f1_hz > EXTRAP_HIGH_FACTOR * hi1
        or f2_hz < EXTRAP_LOW_FACTOR * lo2
        or f2_hz > EXTRAP_HIGH_FACTOR * hi2
    )


def predict_params(model: RegressionModel, f1_hz: float, f2_hz: float) -> ArticulatoryParams:
    """Evaluate the fitted map at one formant pair."""
    row = build_design(float(f1_hz), float(f2_hz)) @ model.coefficients
    return ArticulatoryParams(
        knot1=geometry.frozen(row[0:2]),
        knot11=geometry.frozen(row[2:4]),
        scores=geometry.frozen(row[4:6]),
        extrapolated=is_extrapolated(model, f1_hz, f2_hz),
    )


def train_model(corpus: Corpus, digest: str | None = None) -> ModelBundle:
    """Full training pass: center, align, PCA, regression.

    Accepts a centered or raw corpus; digest defaults to the SHA-256 of
    the corpus in canonical CSV form as given.
    """
    if digest is None:
        digest = corpus_digest(corpus)
    centered = corpus if corpus.centered else center_by_speaker(corpus)
    gpa = shapespace.gpa_align(np.stack([r.knots for r in centered.records]))
    vectors = shapespace.tangent_project(gpa.aligned, gpa.mean_shape)
    pca = shapespace.fit_pca(vectors, gpa.mean_shape)
    regression = fit_regression(centered, pca)
    return ModelBundle(pca=pca, regression=regression, corpus_digest=digest)


# ---------------------------------------------------------------------------
# Bundle persistence (JSON, sorted keys, round-trip exact via float repr)
# ---------------------------------------------------------------------------

def bundle_to_json(bundle: ModelBundle) -> str:
    payload = {
        "format": BUNDLE_FORMAT,
        "corpus_digest": bundle.corpus_digest,
        "pca": {
            "mean_shape": bundle.pca.mean_shape.tolist(),
            "components": bundle.pca.components.tolist(),
            "eigenvalues": bundle.pca.eigenvalues.tolist(),
            "n_samples": bundle.pca.n_samples,
        },
        "regression": {
            "coefficients": bundle.regression.coefficients.tolist(),
            "residual_variance": bundle.regression.residual_variance.tolist(),
            "r_squared": bundle.regression.r_squared.tolist(),
            "f1_range": bundle.regression.f1_range.tolist(),
            "f2_range": bundle.regression.f2_range.tolist(),
            "n_tokens": bundle.regression.n_tokens,
        },
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def save_bundle(bundle: ModelBundle, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(bundle_to_json(bundle))


def _array(payload: dict, section: str, key: str, shape: tuple) -> np.ndarray:
    try:
        arr = np.asarray(payload[key], dtype=np.float64)
    except KeyError:
        raise ModelFormatError(f"bundle is missing {section}.{key}") from None
    except (TypeError, ValueError):
        raise ModelFormatError(f"bundle field {section}.{key} is not numeric") from None
    if arr.shape != shape:
        raise ModelFormatError(f"bundle field {section}.{key} has shape {arr.shape}, expected {shape}")
    if not np.all(np.isfinite(arr)):
        raise ModelFormatError(f"bundle field {section}.{key} contains non-finite values")
    return geometry.frozen(arr)


def bundle_from_json(text: str) -> ModelBundle:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"bundle is not valid JSON: {exc}") from None
    if not isinstance(payload, dict) or payload.get("format") != BUNDLE_FORMAT:
        raise ModelFormatError(
            f"unrecognized bundle format {payload.get('format')!r}"
            if isinstance(payload, dict)
            else "bundle must be a JSON object"
        )
    try:
        pca_raw = payload["pca"]
        reg_raw = payload["regression"]
        digest = payload["corpus_digest"]
    except KeyError as exc:
        raise ModelFormatError(f"bundle is missing section {exc}") from None
    k = 2 * geometry.N_KNOTS
    pca = PcaModel(
        mean_shape=_array(pca_raw, "pca", "mean_shape", (geometry.N_KNOTS, 2)),
        components=_array(pca_raw, "pca", "components", (k, k)),
        eigenvalues=_array(pca_raw, "pca", "eigenvalues", (k,)),
        n_samples=int(pca_raw.get("n_samples", 0)),
    )
    regression = RegressionModel(
        coefficients=_array(reg_raw, "regression", "coefficients", (N_PREDICTORS, N_TARGETS)),
        residual_variance=_array(reg_raw, "regression", "residual_variance", (N_TARGETS,)),
        r_squared=_array(reg_raw, "regression", "r_squared", (N_TARGETS,)),
        f1_range=_array(reg_raw, "regression", "f1_range", (2,)),
        f2_range=_array(reg_raw, "regression", "f2_range", (2,)),
        n_tokens=int(reg_raw.get("n_tokens", 0)),
    )
    return ModelBundle(pca=pca, regression=regression, corpus_digest=str(digest))


def load_bundle(path) -> ModelBundle:
    with open(path, "r", encoding="utf-8") as fh:
        return bundle_from_json(fh.read())
