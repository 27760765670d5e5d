"""Training-corpus loading, validation, per-speaker centering, and synthesis.

A corpus row is one vowel token: speaker label, item (word) label, 11
tongue-contour landmarks in mm from the epiglottic vallecula to the tongue
tip, and the first two formants in Hz.

The synthetic generator builds its default item templates from a planted
linear forward map (formants -> endpoint positions and two shape modes),
so corpora made with zero noise have articulatory targets that are exactly
linear in (1, F1, F2, F1*F2). Tests lean on that heavily.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .errors import AlreadyCenteredError, CorpusError
from .geometry import N_KNOTS

CSV_COLUMNS = (
    ["speaker", "item"]
    + [f"{axis}{i}" for i in range(1, N_KNOTS + 1) for axis in ("x", "y")]
    + ["f1", "f2"]
)


@dataclass(frozen=True, eq=False)
class TokenRecord:
    """One vowel token: 11 landmarks (mm) plus its measured F1/F2 (Hz)."""

    speaker_id: str
    item: str
    knots: np.ndarray
    f1_hz: float
    f2_hz: float

    def __post_init__(self):
        knots = geometry.frozen(geometry.as_configuration(self.knots))
        object.__setattr__(self, "knots", knots)
        if not (np.isfinite(self.f1_hz) and self.f1_hz > 0):
            raise ValueError(f"f1_hz must be positive, got {self.f1_hz}")
        if not (np.isfinite(self.f2_hz) and self.f2_hz > 0):
            raise ValueError(f"f2_hz must be positive, got {self.f2_hz}")
        if not self.f2_hz > self.f1_hz:
            raise ValueError(f"f2_hz ({self.f2_hz}) must exceed f1_hz ({self.f1_hz})")


@dataclass(frozen=True)
class Corpus:
    records: tuple[TokenRecord, ...]
    centered: bool = False

    def __len__(self):
        return len(self.records)

    def speakers(self) -> list[str]:
        seen = dict.fromkeys(r.speaker_id for r in self.records)
        return list(seen)

    def items(self) -> list[str]:
        seen = dict.fromkeys(r.item for r in self.records)
        return list(seen)


@dataclass(frozen=True, eq=False)
class ItemSummary:
    item: str
    mean_knots: np.ndarray
    mean_f1_hz: float
    mean_f2_hz: float


def _parse_float(raw: str, line: int, column: str) -> float:
    if raw is None or raw.strip() == "":
        raise CorpusError("empty cell", row=line, column=column)
    try:
        return float(raw)
    except ValueError:
        raise CorpusError(f"non-numeric value {raw!r}", row=line, column=column) from None


def _record_from_row(row: list[str], line: int) -> TokenRecord:
    if len(row) != len(CSV_COLUMNS):
        raise CorpusError(
            f"expected {len(CSV_COLUMNS)} cells ({N_KNOTS} landmark pairs), got {len(row)}",
            row=line,
        )
    speaker, item = row[0], row[1]
    if speaker.strip() == "":
        raise CorpusError("empty cell", row=line, column="speaker")
    if item.strip() == "":
        raise CorpusError("empty cell", row=line, column="item")
    values = [_parse_float(raw, line, CSV_COLUMNS[i + 2]) for i, raw in enumerate(row[2:])]
    knots = np.array(values[: 2 * N_KNOTS], dtype=np.float64).reshape(N_KNOTS, 2)
    f1, f2 = values[2 * N_KNOTS], values[2 * N_KNOTS + 1]
    try:
        return TokenRecord(speaker_id=speaker, item=item, knots=knots, f1_hz=f1, f2_hz=f2)
    except ValueError as exc:
        raise CorpusError(str(exc), row=line) from None


def parse_corpus_csv(text: str) -> Corpus:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise CorpusError("file is empty") from None
    if [h.strip() for h in header] != CSV_COLUMNS:
        missing = [c for c in CSV_COLUMNS if c not in header]
        if missing:
            raise CorpusError(f"missing column(s): {', '.join(missing)}", row=1)
        raise CorpusError("header does not match the corpus schema", row=1)
    records = []
    for line, row in enumerate(reader, start=2):
        if not row:
            continue
        records.append(_record_from_row(row, line))
    return Corpus(records=tuple(records), centered=False)


def load_corpus(path) -> Corpus:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return parse_corpus_csv(fh.read())


def _fmt(value: float) -> str:
    return repr(float(value))


def corpus_to_csv(corpus: Corpus) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in corpus.records:
        writer.writerow(
            [r.speaker_id, r.item]
            + [_fmt(v) for v in r.knots.ravel()]
            + [_fmt(r.f1_hz), _fmt(r.f2_hz)]
        )
    return out.getvalue()


def save_corpus(corpus: Corpus, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(corpus_to_csv(corpus))


def corpus_digest(corpus: Corpus) -> str:
    """SHA-256 of the corpus in canonical CSV form."""
    return hashlib.sha256(corpus_to_csv(corpus).encode("utf-8")).hexdigest()


def center_by_speaker(corpus: Corpus) -> Corpus:
    """Subtract each speaker's single 2-D centroid (over all knots and all
    tokens jointly) from that speaker's landmarks.

    Removes probe-placement offset, a rigid translation, while leaving
    per-knot shape information intact. Formants are untouched.
    """
    if corpus.centered:
        raise AlreadyCenteredError("corpus is already centered by speaker")
    by_speaker: dict[str, list[TokenRecord]] = {}
    for r in corpus.records:
        by_speaker.setdefault(r.speaker_id, []).append(r)
    centroids = {
        spk: np.concatenate([r.knots for r in recs]).mean(axis=0)
        for spk, recs in by_speaker.items()
    }
    records = tuple(
        TokenRecord(
            speaker_id=r.speaker_id,
            item=r.item,
            knots=r.knots - centroids[r.speaker_id],
            f1_hz=r.f1_hz,
            f2_hz=r.f2_hz,
        )
        for r in corpus.records
    )
    return Corpus(records=records, centered=True)


def item_means(corpus: Corpus) -> list[ItemSummary]:
    """Arithmetic by-item means of every knot coordinate and of F1/F2.

    Requires a centered corpus so means are comparable across speakers.
    Summaries are sorted by item label.
    """
    if not corpus.centered:
        raise ValueError("item_means requires a centered corpus")
    if not corpus.records:
        raise ValueError("corpus is empty")
    groups: dict[str, list[TokenRecord]] = {}
    for r in corpus.records:
        groups.setdefault(r.item, []).append(r)
    summaries = []
    for item in sorted(groups):
        recs = groups[item]
        summaries.append(
            ItemSummary(
                item=item,
                mean_knots=geometry.frozen(np.mean([r.knots for r in recs], axis=0)),
                mean_f1_hz=float(np.mean([r.f1_hz for r in recs])),
                mean_f2_hz=float(np.mean([r.f2_hz for r in recs])),
            )
        )
    return summaries


# ---------------------------------------------------------------------------
# Synthetic corpora
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ItemTemplate:
    item: str
    knots: np.ndarray
    f1_hz: float
    f2_hz: float

    def __post_init__(self):
        object.__setattr__(self, "knots", geometry.frozen(geometry.as_configuration(self.knots)))


@dataclass(frozen=True)
class SynthSpec:
    n_speakers: int = 40
    tokens_per_item: int = 5
    item_templates: tuple[ItemTemplate, ...] = ()
    noise_sd_mm: float = 0.0
    speaker_offset_sd_mm: float = 0.0
    # magnitude of the per-token formant jitter; the template field list
    # leaves this implicit, 0 keeps targets exactly linear
    formant_jitter_hz: float = 0.0

    def __post_init__(self):
        if self.n_speakers < 1:
            raise ValueError("n_speakers must be >= 1")
        if self.tokens_per_item < 1:
            raise ValueError("tokens_per_item must be >= 1")
        if not self.item_templates:
            object.__setattr__(self, "item_templates", tuple(default_item_templates()))


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """What the generator knew: noiseless templates, the per-speaker offsets
    it injected, and the planted forward map behind the default templates."""

    templates: tuple[ItemTemplate, ...]
    speaker_offsets: dict[str, np.ndarray]
    forward_coefficients: np.ndarray | None = None
    mean_shape: np.ndarray | None = None
    shape_modes: np.ndarray | None = None


# Plausible resting tongue contour in occlusal-plane mm, vallecula (left,
# posterior, x negative) to tip (right, anterior). Dorsum peaks mid-back.
MEAN_CONTOUR_MM = np.array(
    [
        [-32.0, -4.0],
        [-25.6, 1.5],
        [-19.2, 6.0],
        [-12.8, 9.0],
        [-6.4, 10.8],
        [0.0, 11.2],
        [6.4, 10.3],
        [12.8, 8.2],
        [19.2, 5.2],
        [25.6, 1.8],
        [32.0, -1.5],
    ]
)

# Planted forward map: rows (intercept, F1, F2, F1*F2), columns
# (knot1_x, knot1_y, knot11_x, knot11_y, mode1, mode2). Mode 1 rocks the
# dorsum peak forward as F2 rises; mode 2 flattens the arch as F1 rises,
# more strongly when F2 is high (the interaction term).
FORWARD_COEFFS = np.array(
    [
        [-36.5, -1.0, 27.0, 1.5, -0.105, 0.080],
        [0.0, -4.0e-3, 0.0, -2.0e-3, 0.0, -3.0e-5],
        [2.0e-3, 0.0, 1.2e-3, 0.0, 6.0e-5, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, -4.5e-8],
    ]
)

DEFAULT_ITEM_FORMANTS = (
    ("bead", 320.0, 2450.0),
    ("bid", 420.0, 2100.0),
    ("bed", 550.0, 1950.0),
    ("bad", 750.0, 1650.0),
    ("bard", 700.0, 1100.0),
    ("bod", 620.0, 950.0),
    ("bored", 480.0, 850.0),
    ("booed", 340.0, 1300.0),
    ("bud", 640.0, 1250.0),
    ("bird", 500.0, 1500.0),
)


def _shape_basis() -> tuple[np.ndarray, np.ndarray]:
    """Unit mean pre-shape and two orthonormal shape modes (11, 2) each.

    Raw mode patterns: a full sine in y (rocks the bump along the contour)
    and a half sine in y (arches the mid contour). Both are centered,
    projected off the mean direction, and Gram-Schmidt orthonormalized.
    """
    mean = geometry.to_preshape(MEAN_CONTOUR_MM)
    mean_flat = mean.ravel()
    u = np.linspace(0.0, 1.0, N_KNOTS)
    raw_rock = np.zeros((N_KNOTS, 2))
    raw_rock[:, 1] = -np.sin(2.0 * np.pi * u)
    raw_arch = np.zeros((N_KNOTS, 2))
    raw_arch[:, 1] = np.sin(np.pi * u)
    modes = []
    for raw in (raw_rock, raw_arch):
        v = (raw - raw.mean(axis=0)).ravel()
        v -= (v @ mean_flat) * mean_flat
        for b in modes:
            v -= (v @ b) * b
        v /= np.linalg.norm(v)
        modes.append(v)
    return mean, np.stack([m.reshape(N_KNOTS, 2) for m in modes])


def forward_contour(f1_hz: float, f2_hz: float) -> np.ndarray:
    """Evaluate the planted forward map at one formant pair: 11 knots in mm."""
    mean, modes = _shape_basis()
    design = np.array([1.0, f1_hz, f2_hz, f1_hz * f2_hz])
    params = design @ FORWARD_COEFFS
    shape = mean + params[4] * modes[0] + params[5] * modes[1]
    return geometry.similarity_from_endpoints(shape, params[0:2], params[2:4])


def default_item_templates() -> list[ItemTemplate]:
    return [
        ItemTemplate(item=item, knots=forward_contour(f1, f2), f1_hz=f1, f2_hz=f2)
        for item, f1, f2 in DEFAULT_ITEM_FORMANTS
    ]


def synth_corpus(spec: SynthSpec, seed: int) -> tuple[Corpus, GroundTruth]:
    """Generate a deterministic synthetic corpus.

    Each token is its item template plus a per-speaker translation offset
    plus i.i.d. landmark noise; formants are the template formants plus
    jitter. Fixed seed means byte-identical output.
    """
    rng = np.random.default_rng(seed)
    speakers = [f"spk{idx + 1:02d}" for idx in range(spec.n_speakers)]
    offsets = {
        spk: rng.normal(0.0, spec.speaker_offset_sd_mm, size=2)
        if spec.speaker_offset_sd_mm > 0
        else np.zeros(2)
        for spk in speakers
    }
    records = []
    for spk in speakers:
        for template in spec.item_templates:
            for _ in range(spec.tokens_per_item):
                knots = template.knots + offsets[spk]
                if spec.noise_sd_mm > 0:
                    knots = knots + rng.normal(0.0, spec.noise_sd_mm, size=(N_KNOTS, 2))
                f1, f2 = template.f1_hz, template.f2_hz
                if spec.formant_jitter_hz > 0:
                    f1 += rng.normal(0.0, spec.formant_jitter_hz)
                    f2 += rng.normal(0.0, spec.formant_jitter_hz)
                    f1 = max(f1, 50.0)
                    f2 = max(f2, 1.05 * f1)
                records.append(
                    TokenRecord(speaker_id=spk, item=template.item, knots=knots, f1_hz=f1, f2_hz=f2)
                )
    defaults = default_item_templates()
    uses_default = len(spec.item_templates) == len(defaults) and all(
        a.item == b.item
        and a.f1_hz == b.f1_hz
        and a.f2_hz == b.f2_hz
        and np.array_equal(a.knots, b.knots)
        for a, b in zip(spec.item_templates, defaults)
    )
    mean, modes = _shape_basis()
    truth = GroundTruth(
        templates=tuple(spec.item_templates),
        speaker_offsets={k: geometry.frozen(v.reshape(1, 2))[0] for k, v in offsets.items()},
        forward_coefficients=FORWARD_COEFFS.copy() if uses_default else None,
        mean_shape=geometry.frozen(mean) if uses_default else None,
        shape_modes=np.stack([geometry.frozen(m) for m in modes]) if uses_default else None,
    )
    return Corpus(records=tuple(records), centered=False), truth


def ground_truth_to_json(truth: GroundTruth) -> str:
    """Sidecar JSON for a synthetic corpus: everything the generator knew."""
    payload: dict = {
        "format": "aurora-truth/1",
        "templates": [
            {
                "item": t.item,
                "f1_hz": float(t.f1_hz),
                "f2_hz": float(t.f2_hz),
                "knots_mm": t.knots.tolist(),
            }
            for t in truth.templates
        ],
        "speaker_offsets_mm": {
            spk: off.tolist() for spk, off in sorted(truth.speaker_offsets.items())
        },
    }
    if truth.forward_coefficients is not None:
        payload["forward_coefficients"] = truth.forward_coefficients.tolist()
        payload["mean_shape"] = truth.mean_shape.tolist()
        payload["shape_modes"] = truth.shape_modes.tolist()
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def save_ground_truth(truth: GroundTruth, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(ground_truth_to_json(truth))
