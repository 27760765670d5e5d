"""End-to-end demo on a synthetic corpus.

Generates a noisy training corpus, trains the shape model, renders the
formant-grid and per-item overlay figures, precompiles the lookup table,
then tracks a synthesized vowel and reports what the full pipeline
recovered. Everything lands in --out-dir.

Usage: python3 scripts/run_pipeline_demo.py --out-dir demo_out
"""
import argparse
import time
from pathlib import Path

import numpy as np

from aurora.corpus import (
    SynthSpec,
    center_by_speaker,
    corpus_digest,
    save_corpus,
    save_ground_truth,
    synth_corpus,
)
from aurora.formants import AnalysisConfig, track
from aurora.inversion import contour_to_csv, evaluate_item_means, grid_predict, invert
from aurora.lut import compile_lut, query_lut, save_lut
from aurora.regress import TARGET_NAMES, save_bundle, train_model
from aurora.render import contours_svg, grid_svg
from aurora.vowelsynth import synth_vowel, write_wav


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="demo_out")
    parser.add_argument("--speakers", type=int, default=20)
    parser.add_argument("--noise-sd-mm", type=float, default=0.5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    print(f"== synthesizing corpus ({args.speakers} speakers, "
          f"noise {args.noise_sd_mm} mm) ==")
    spec = SynthSpec(
        n_speakers=args.speakers,
        tokens_per_item=5,
        noise_sd_mm=args.noise_sd_mm,
        speaker_offset_sd_mm=4.0,
        formant_jitter_hz=30.0,
    )
    corp, truth = synth_corpus(spec, seed=args.seed)
    save_corpus(corp, out / "corpus.csv")
    save_ground_truth(truth, out / "corpus.truth.json")
    print(f"   {len(corp.records)} tokens, digest {corpus_digest(corp)[:12]}")

    print("== training ==")
    t0 = time.perf_counter()
    bundle = train_model(corp)
    save_bundle(bundle, out / "model.json")
    ratios = bundle.pca.variance_ratio()
    print(f"   {time.perf_counter() - t0:.2f} s; "
          f"pc1 {100 * ratios[0]:.1f}%, pc2 {100 * ratios[1]:.1f}% variance")
    for name, r2 in zip(TARGET_NAMES, bundle.regression.r_squared):
        print(f"   r2 {name:8s} {r2:.4f}")

    print("== figures ==")
    rows = grid_predict(bundle, 320.0, 903.0, 828.0, 2616.0, steps=4)
    (out / "grid.svg").write_text(grid_svg(rows))
    centered = center_by_speaker(corp)
    eval_rows = evaluate_item_means(bundle, centered)
    for row in eval_rows:
        svg = contours_svg(
            [("measured mean", row.mean_contour), ("model", row.predicted_contour)],
            title=row.item, show_knots=True,
        )
        (out / f"overlay_{row.item}.svg").write_text(svg)
    worst = max(eval_rows, key=lambda r: r.per_knot_rmsd_mm)
    print(f"   grid.svg + {len(eval_rows)} overlays; worst item RMSD "
          f"{worst.per_knot_rmsd_mm:.3f} mm ({worst.item})")

    print("== lookup table ==")
    t0 = time.perf_counter()
    table = compile_lut(bundle, 320.0, 903.0, 828.0, 2616.0, step=10.0)
    save_lut(table, out / "table.lut")
    print(f"   {table.header.n1} x {table.header.n2} nodes in "
          f"{time.perf_counter() - t0:.2f} s")

    print("== tracking a synthesized [a]-like vowel ==")
    sr = 16000
    planted = [(700.0, 80.0), (1100.0, 120.0), (2400.0, 160.0)]
    signal = synth_vowel(planted, duration_s=1.0, sample_rate=sr, f0_hz=100.0)
    write_wav(out / "vowel.wav", signal, sr)
    config = AnalysisConfig(sample_rate=sr, frame_size=512, hop_size=160,
                            preemphasis=0.5, lpc_order=18)
    frames = track(signal, config)
    voiced = [f for f in frames if f.voiced and len(f.formants) >= 2]
    med_f1 = float(np.median([f.formants[0].freq_hz for f in voiced]))
    med_f2 = float(np.median([f.formants[1].freq_hz for f in voiced]))
    print(f"   planted F1/F2 {planted[0][0]:.0f}/{planted[1][0]:.0f} Hz, "
          f"tracked medians {med_f1:.1f}/{med_f2:.1f} Hz "
          f"({len(voiced)}/{len(frames)} voiced frames)")

    looked_up = query_lut(table, med_f1, med_f2)
    direct = invert(bundle, med_f1, med_f2)
    dev = float(np.abs(looked_up.points - direct.points).max())
    (out / "tracked_contour.csv").write_text(contour_to_csv(looked_up))
    (out / "tracked_contour.svg").write_text(contours_svg(
        [("lookup", looked_up), ("direct inversion", direct)],
        title=f"tracked vowel, F1 {med_f1:.0f} Hz, F2 {med_f2:.0f} Hz",
    ))
    print(f"   lookup vs direct inversion: max deviation {dev:.2e} mm")
    print(f"== done; artifacts in {out}/ ==")


if __name__ == "__main__":
    main()
