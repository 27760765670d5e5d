"""Corpus loading, centering, item means, and the synthetic generator."""
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aurora import corpus
from aurora.corpus import (
    Corpus,
    ItemTemplate,
    SynthSpec,
    TokenRecord,
    center_by_speaker,
    corpus_to_csv,
    item_means,
    load_corpus,
    parse_corpus_csv,
    save_corpus,
    synth_corpus,
)
from aurora.errors import AlreadyCenteredError, CorpusError


def small_corpus(seed=3, **kw):
    spec = SynthSpec(
        n_speakers=kw.pop("n_speakers", 4),
        tokens_per_item=kw.pop("tokens_per_item", 2),
        noise_sd_mm=kw.pop("noise_sd_mm", 0.3),
        speaker_offset_sd_mm=kw.pop("speaker_offset_sd_mm", 4.0),
        **kw,
    )
    return synth_corpus(spec, seed=seed)


class TestTokenRecord:
    def test_rejects_wrong_knot_count(self):
        with pytest.raises(ValueError):
            TokenRecord("s", "bead", np.zeros((10, 2)), 300.0, 2000.0)

    def test_rejects_nonfinite_landmark(self):
        knots = np.zeros((11, 2))
        knots[3, 1] = np.nan
        with pytest.raises(ValueError):
            TokenRecord("s", "bead", knots, 300.0, 2000.0)

    def test_rejects_f2_not_above_f1(self):
        with pytest.raises(ValueError):
            TokenRecord("s", "bead", np.random.default_rng(0).normal(size=(11, 2)), 900.0, 800.0)

    def test_knots_are_read_only(self):
        rec = TokenRecord("s", "bead", np.zeros((11, 2)) + 1.0, 300.0, 2000.0)
        with pytest.raises(ValueError):
            rec.knots[0, 0] = 5.0


class TestCsvRoundTrip:
    def test_synth_corpus_round_trips_exactly(self, tmp_path):
        corp, _ = small_corpus()
        path = tmp_path / "corpus.csv"
        save_corpus(corp, path)
        back = load_corpus(path)
        assert len(back) == len(corp)
        for a, b in zip(corp.records, back.records):
            assert a.speaker_id == b.speaker_id and a.item == b.item
            assert np.array_equal(a.knots, b.knots)
            assert a.f1_hz == b.f1_hz and a.f2_hz == b.f2_hz

    @given(st.lists(
        st.tuples(
            st.floats(-60, 60).filter(lambda v: abs(v) > 1e-6),
            st.floats(200, 900),
            st.floats(1000, 2800),
        ),
        min_size=1, max_size=8,
    ))
    @settings(max_examples=40, deadline=None)
    def test_round_trip_preserves_arbitrary_floats(self, rows):
        rng = np.random.default_rng(0)
        records = tuple(
            TokenRecord("s1", "bead", rng.normal(scale=20, size=(11, 2)) + off, f1, f2)
            for off, f1, f2 in rows
        )
        corp = Corpus(records=records)
        back = parse_corpus_csv(corpus_to_csv(corp))
        for a, b in zip(corp.records, back.records):
            assert np.array_equal(a.knots, b.knots)
            assert a.f1_hz == b.f1_hz and a.f2_hz == b.f2_hz

    def test_missing_column_reported(self):
        text = "speaker,item,x1,y1\ns1,bead,0,0\n"
        with pytest.raises(CorpusError) as exc:
            parse_corpus_csv(text)
        assert "x2" in str(exc.value)

    def test_bad_cell_names_row_and_column(self):
        corp, _ = small_corpus(n_speakers=1, tokens_per_item=1)
        lines = corpus_to_csv(corp).splitlines()
        cells = lines[3].split(",")
        cells[7] = "oops"
        lines[3] = ",".join(cells)
        with pytest.raises(CorpusError) as exc:
            parse_corpus_csv("\n".join(lines) + "\n")
        msg = str(exc.value)
        assert "row 4" in msg and corpus.CSV_COLUMNS[7] in msg

    def test_short_row_reported(self):
        corp, _ = small_corpus(n_speakers=1, tokens_per_item=1)
        lines = corpus_to_csv(corp).splitlines()
        lines[2] = ",".join(lines[2].split(",")[:-1])
        with pytest.raises(CorpusError) as exc:
            parse_corpus_csv("\n".join(lines) + "\n")
        assert "row 3" in str(exc.value)

    def test_empty_file(self):
        with pytest.raises(CorpusError):
            parse_corpus_csv("")


class TestCentering:
    def test_centered_speaker_centroid_is_zero(self):
        corp, _ = small_corpus()
        cen = center_by_speaker(corp)
        for spk in cen.speakers():
            stack = np.concatenate([r.knots for r in cen.records if r.speaker_id == spk])
            assert np.abs(stack.mean(axis=0)).max() < 1e-12

    def test_recovers_pre_offset_geometry(self):
        # Centering is invariant to the injected per-speaker translations:
        # centered noisy+offset data equals centered pre-offset data.
        corp, truth = small_corpus(speaker_offset_sd_mm=6.0, noise_sd_mm=0.5)
        pre = Corpus(records=tuple(
            TokenRecord(r.speaker_id, r.item,
                        r.knots - truth.speaker_offsets[r.speaker_id],
                        r.f1_hz, r.f2_hz)
            for r in corp.records
        ))
        cen, cen_pre = center_by_speaker(corp), center_by_speaker(pre)
        for a, b in zip(cen.records, cen_pre.records):
            assert np.abs(a.knots - b.knots).max() < 1e-9

    def test_formants_untouched(self):
        corp, _ = small_corpus()
        cen = center_by_speaker(corp)
        for a, b in zip(corp.records, cen.records):
            assert a.f1_hz == b.f1_hz and a.f2_hz == b.f2_hz

    def test_double_centering_raises(self):
        corp, _ = small_corpus()
        cen = center_by_speaker(corp)
        with pytest.raises(AlreadyCenteredError):
            center_by_speaker(cen)


class TestItemMeans:
    def test_requires_centered(self):
        corp, _ = small_corpus()
        with pytest.raises(ValueError):
            item_means(corp)

    def test_item_set_preserved(self):
        corp, _ = small_corpus()
        summaries = item_means(center_by_speaker(corp))
        assert sorted(s.item for s in summaries) == sorted(corp.items())

    def test_matches_streaming_mean(self):
        # Oracle: incremental (Welford-style) running mean per item.
        corp, _ = small_corpus(noise_sd_mm=0.8)
        cen = center_by_speaker(corp)
        running: dict[str, list] = {}
        for r in cen.records:
            if r.item not in running:
                running[r.item] = [0, np.zeros((11, 2)), 0.0, 0.0]
            state = running[r.item]
            state[0] += 1
            state[1] += (r.knots - state[1]) / state[0]
            state[2] += (r.f1_hz - state[2]) / state[0]
            state[3] += (r.f2_hz - state[3]) / state[0]
        for s in item_means(cen):
            n, knots, f1, f2 = running[s.item]
            assert np.abs(s.mean_knots - knots).max() < 1e-12
            assert abs(s.mean_f1_hz - f1) < 1e-12
            assert abs(s.mean_f2_hz - f2) < 1e-12

    def test_permutation_invariant(self):
        corp, _ = small_corpus(noise_sd_mm=0.6)
        cen = center_by_speaker(corp)
        rng = np.random.default_rng(11)
        order = rng.permutation(len(cen.records))
        shuffled = Corpus(records=tuple(cen.records[i] for i in order), centered=True)
        base = {s.item: s for s in item_means(cen)}
        for s in item_means(shuffled):
            ref = base[s.item]
            assert np.abs(s.mean_knots - ref.mean_knots).max() < 1e-12
            assert abs(s.mean_f1_hz - ref.mean_f1_hz) < 1e-12
            assert abs(s.mean_f2_hz - ref.mean_f2_hz) < 1e-12


class TestSynthCorpus:
    def test_row_count(self):
        corp, _ = small_corpus(n_speakers=5, tokens_per_item=3)
        assert len(corp) == 5 * 10 * 3

    def test_deterministic_under_fixed_seed(self):
        a, _ = small_corpus(seed=42)
        b, _ = small_corpus(seed=42)
        assert corpus_to_csv(a) == corpus_to_csv(b)

    def test_seed_changes_output(self):
        a, _ = small_corpus(seed=1)
        b, _ = small_corpus(seed=2)
        assert corpus_to_csv(a) != corpus_to_csv(b)

    def test_noiseless_tokens_equal_template_plus_offset(self):
        corp, truth = small_corpus(noise_sd_mm=0.0, speaker_offset_sd_mm=3.0)
        templates = {t.item: t for t in truth.templates}
        for r in corp.records:
            expected = templates[r.item].knots + truth.speaker_offsets[r.speaker_id]
            assert np.abs(r.knots - expected).max() < 1e-12

    def test_custom_templates_respected(self):
        rng = np.random.default_rng(5)
        tmpl = (
            ItemTemplate("aa", rng.normal(scale=15, size=(11, 2)), 700.0, 1200.0),
            ItemTemplate("ii", rng.normal(scale=15, size=(11, 2)), 300.0, 2300.0),
        )
        spec = SynthSpec(n_speakers=2, tokens_per_item=1, item_templates=tmpl)
        corp, truth = synth_corpus(spec, seed=0)
        assert sorted(corp.items()) == ["aa", "ii"]
        assert truth.forward_coefficients is None

    def test_full_scale_generation_is_fast(self):
        spec = SynthSpec(n_speakers=40, tokens_per_item=5,
                         noise_sd_mm=0.4, speaker_offset_sd_mm=4.0)
        t0 = time.perf_counter()
        corp, _ = synth_corpus(spec, seed=9)
        assert len(corp) == 40 * 10 * 5
        assert time.perf_counter() - t0 < 1.0

    def test_invalid_sizes_rejected(self):
        with pytest.raises(ValueError):
            SynthSpec(n_speakers=0)
        with pytest.raises(ValueError):
            SynthSpec(tokens_per_item=0)


class TestForwardMap:
    def test_modes_are_orthonormal_and_tangent(self):
        mean, modes = corpus._shape_basis()
        flat = modes.reshape(2, -1)
        assert abs(flat[0] @ flat[0] - 1.0) < 1e-12
        assert abs(flat[1] @ flat[1] - 1.0) < 1e-12
        assert abs(flat[0] @ flat[1]) < 1e-12
        assert abs(flat[0] @ mean.ravel()) < 1e-12
        assert abs(flat[1] @ mean.ravel()) < 1e-12

    def test_contour_endpoints_follow_planted_map(self):
        f1, f2 = 480.0, 1700.0
        c = corpus.forward_contour(f1, f2)
        design = np.array([1.0, f1, f2, f1 * f2])
        params = design @ corpus.FORWARD_COEFFS
        assert np.abs(c[0] - params[0:2]).max() < 1e-9
        assert np.abs(c[10] - params[2:4]).max() < 1e-9

    def test_templates_span_plausible_formant_space(self):
        templates = corpus.default_item_templates()
        f1s = [t.f1_hz for t in templates]
        f2s = [t.f2_hz for t in templates]
        assert min(f1s) >= 250 and max(f1s) <= 900
        assert min(f2s) >= 700 and max(f2s) <= 2800
        assert len(templates) == 10
