"""Command-line front end.

Exit codes: 0 success, 1 usage error (bad flags, grids over the cell
cap), 2 data error (malformed corpus/model/table files), 3 runtime error
(audio device or server failures). Diagnostics go to stderr, data to
stdout, so every subcommand composes in shell pipelines.
"""
from __future__ import annotations

import sys
from pathlib import Path

import click

from .corpus import (
    SynthSpec,
    center_by_speaker,
    corpus_digest,
    load_corpus,
    save_corpus,
    save_ground_truth,
    synth_corpus,
)
from .errors import DataError, GridTooLargeError, RuntimeFailure
from .formants import AnalysisConfig, frames_to_csv, read_wav, track
from .inversion import contour_to_csv, evaluate_item_means, grid_predict, invert
from .lut import bundle_digest, compile_lut, save_lut
from .regress import TARGET_NAMES, load_bundle, save_bundle, train_model
from .render import contours_svg, grid_svg

# Full adult vowel-space extremes; the default precompiled grid covers
# them at 10 Hz so realtime queries never need the regression path.
DEFAULT_F1_RANGE = (320.0, 903.0)
DEFAULT_F2_RANGE = (828.0, 2616.0)
DEFAULT_LUT_STEP = 10.0

_positive = click.FloatRange(min=0, min_open=True)


def _diag(message: str) -> None:
    click.echo(message, err=True)


def _emit(text: str, out_path: str | None) -> None:
    if out_path is None:
        click.echo(text, nl=False)
    else:
        Path(out_path).write_text(text, encoding="utf-8")


def _read_wav_checked(path):
    try:
        return read_wav(path)
    except (ValueError, EOFError) as exc:
        raise DataError(f"cannot read WAV {path}: {exc}") from None


@click.group()
@click.version_option(package_name="aurora", message="%(version)s")
def cli():
    """Articulatory inversion toolkit: train a tongue-shape model from a
    landmark corpus, invert formants to contours, and serve realtime
    biofeedback."""


# -- train --------------------------------------------------------------------


@cli.command("train")
@click.option("--corpus", "corpus_path", required=True, metavar="CSV",
              help="Training corpus (speaker, item, 11 knots, F1, F2 per row).")
@click.option("--out", "out_path", required=True, metavar="JSON",
              help="Where to write the model bundle.")
def cmd_train(corpus_path: str, out_path: str):
    """Fit the shape space and formant regression; write a model bundle."""
    corp = load_corpus(corpus_path)
    digest = corpus_digest(corp)
    bundle = train_model(center_by_speaker(corp), digest=digest)
    save_bundle(bundle, out_path)
    ratios = bundle.pca.variance_ratio()
    click.echo("variance explained:")
    for i in range(2):
        click.echo(f"  pc{i + 1}  {100.0 * ratios[i]:8.4f}%")
    click.echo("per-target r^2:")
    for name, r2 in zip(TARGET_NAMES, bundle.regression.r_squared):
        click.echo(f"  {name:8s} {r2:.6f}")
    _diag(
        f"wrote {out_path}: {bundle.regression.n_tokens} tokens, "
        f"corpus digest {digest[:12]}"
    )


# -- invert -------------------------------------------------------------------


@cli.command("invert")
@click.option("--model", "model_path", required=True, metavar="JSON")
@click.option("--f1", required=True, type=_positive, help="First formant, Hz.")
@click.option("--f2", required=True, type=_positive, help="Second formant, Hz.")
@click.option("--format", "fmt", type=click.Choice(["csv", "svg"]), default="csv",
              show_default=True)
@click.option("--out", "out_path", default=None, metavar="FILE",
              help="Output file; stdout when omitted.")
def cmd_invert(model_path: str, f1: float, f2: float, fmt: str, out_path):
    """Predict one tongue contour from a formant pair."""
    bundle = load_bundle(model_path)
    contour = invert(bundle, f1, f2)
    if contour.extrapolated:
        _diag(
            f"warning: ({f1:g}, {f2:g}) Hz lies outside the training range; "
            "the contour is an extrapolation"
        )
    if fmt == "csv":
        _emit(contour_to_csv(contour), out_path)
    else:
        label = f"F1 {f1:g} Hz, F2 {f2:g} Hz"
        _emit(contours_svg([(label, contour)], title=label), out_path)


# -- grid ---------------------------------------------------------------------


@cli.command("grid")
@click.option("--model", "model_path", required=True, metavar="JSON")
@click.option("--steps", default=4, show_default=True, type=click.IntRange(min=2))
@click.option("--f1-lo", type=_positive, default=None, help="Defaults to the model range.")
@click.option("--f1-hi", type=_positive, default=None)
@click.option("--f2-lo", type=_positive, default=None)
@click.option("--f2-hi", type=_positive, default=None)
@click.option("--svg", "svg_path", default="grid.svg", show_default=True)
@click.option("--csv", "csv_path", default="grid.csv", show_default=True)
def cmd_grid(model_path, steps, f1_lo, f1_hi, f2_lo, f2_hi, svg_path, csv_path):
    """Predict contours over a formant grid: small-multiple SVG plus CSV."""
    bundle = load_bundle(model_path)
    rows = grid_predict(bundle, f1_lo, f1_hi, f2_lo, f2_hi, steps=steps)
    Path(svg_path).write_text(grid_svg(rows), encoding="utf-8")
    lines = ["f1_hz,f2_hz,index,x_mm,y_mm,is_knot"]
    for row in rows:
        for contour in row:
            prefix = f"{repr(float(contour.source_f1_hz))},{repr(float(contour.source_f2_hz))}"
            body = contour_to_csv(contour).splitlines()[1:]
            lines.extend(f"{prefix},{line}" for line in body)
    Path(csv_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    _diag(f"wrote {svg_path} ({steps}x{steps} panels) and {csv_path}")


# -- eval ---------------------------------------------------------------------


@cli.command("eval")
@click.option("--model", "model_path", required=True, metavar="JSON")
@click.option("--corpus", "corpus_path", required=True, metavar="CSV")
@click.option("--svg-dir", "svg_dir", default=None, metavar="DIR",
              help="Write one measured-vs-model overlay SVG per item.")
def cmd_eval(model_path: str, corpus_path: str, svg_dir):
    """Compare model predictions against per-item mean shapes (RMSD, mm)."""
    bundle = load_bundle(model_path)
    corp = center_by_speaker(load_corpus(corpus_path))
    rows = evaluate_item_means(bundle, corp)
    click.echo(f"{'item':12s} {'mean_f1_hz':>10s} {'mean_f2_hz':>10s} {'rmsd_mm':>9s}")
    for row in rows:
        click.echo(
            f"{row.item:12s} {row.mean_f1_hz:10.1f} {row.mean_f2_hz:10.1f} "
            f"{row.per_knot_rmsd_mm:9.4f}"
        )
    if svg_dir is not None:
        out_dir = Path(svg_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for row in rows:
            svg = contours_svg(
                [("measured mean", row.mean_contour), ("model", row.predicted_contour)],
                title=row.item,
                show_knots=True,
            )
            (out_dir / f"{row.item}.svg").write_text(svg, encoding="utf-8")
        _diag(f"wrote {len(rows)} overlay SVGs to {out_dir}")


# -- lut ----------------------------------------------------------------------


@cli.command("lut")
@click.option("--model", "model_path", required=True, metavar="JSON")
@click.option("--out", "out_path", required=True, metavar="BIN")
@click.option("--f1-lo", type=_positive, default=DEFAULT_F1_RANGE[0], show_default=True)
@click.option("--f1-hi", type=_positive, default=DEFAULT_F1_RANGE[1], show_default=True)
@click.option("--f2-lo", type=_positive, default=DEFAULT_F2_RANGE[0], show_default=True)
@click.option("--f2-hi", type=_positive, default=DEFAULT_F2_RANGE[1], show_default=True)
@click.option("--step", type=_positive, default=DEFAULT_LUT_STEP, show_default=True,
              help="Grid spacing in Hz on both axes.")
def cmd_lut(model_path, out_path, f1_lo, f1_hi, f2_lo, f2_hi, step):
    """Precompile the inversion into a binary lookup table."""
    bundle = load_bundle(model_path)
    table = compile_lut(bundle, f1_lo, f1_hi, f2_lo, f2_hi, step=step)
    save_lut(table, out_path)
    header = table.header
    _diag(
        f"wrote {out_path}: {header.n1} x {header.n2} grid, "
        f"F1 {header.f1_lo:g}-{header.f1_hi:g} Hz, "
        f"F2 {header.f2_lo:g}-{header.f2_hi:g} Hz, step {step:g} Hz, "
        f"model digest {table.model_digest[:12]}"
    )


# -- track --------------------------------------------------------------------


@cli.command("track")
@click.option("--wav", "wav_path", required=True, metavar="WAV")
@click.option("--out", "out_path", default=None, metavar="CSV",
              help="Output file; stdout when omitted.")
@click.option("--frame-size", type=click.IntRange(min=8), default=None,
              help="Analysis window, samples.")
@click.option("--hop-size", type=click.IntRange(min=1), default=None,
              help="Hop between frames, samples; defaults to 10 ms.")
@click.option("--lpc-order", type=click.IntRange(min=2), default=None,
              help="Defaults to 2 + sample_rate/1000.")
@click.option("--preemphasis", type=click.FloatRange(0.0, 1.0, max_open=True), default=None)
@click.option("--threshold-db", type=float, default=None,
              help="Voicing gate in dBFS RMS.")
@click.option("--max-formants", type=click.IntRange(min=1), default=None)
@click.option("--max-bandwidth-hz", type=_positive, default=None)
def cmd_track(wav_path, out_path, **config_flags):
    """Track formants through a WAV file; one CSV row per hop."""
    signal, sample_rate = _read_wav_checked(wav_path)
    overrides = {k: v for k, v in config_flags.items() if v is not None}
    config = AnalysisConfig(sample_rate=sample_rate, **overrides)
    frames = track(signal, config)
    _emit(frames_to_csv(frames), out_path)
    n_voiced = sum(f.voiced for f in frames)
    _diag(f"{len(frames)} frames, {n_voiced} voiced, {sample_rate:g} Hz")


# -- synth --------------------------------------------------------------------


@cli.command("synth")
@click.option("--out", "out_path", required=True, metavar="CSV")
@click.option("--truth", "truth_path", default=None, metavar="JSON",
              help="Ground-truth sidecar; defaults to OUT with a .truth.json suffix.")
@click.option("--speakers", type=click.IntRange(min=1), default=40, show_default=True)
@click.option("--tokens-per-item", type=click.IntRange(min=1), default=5, show_default=True)
@click.option("--noise-sd-mm", type=click.FloatRange(min=0.0), default=0.5, show_default=True)
@click.option("--speaker-offset-sd-mm", type=click.FloatRange(min=0.0), default=4.0,
              show_default=True)
@click.option("--formant-jitter-hz", type=click.FloatRange(min=0.0), default=30.0,
              show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def cmd_synth(out_path, truth_path, speakers, tokens_per_item, noise_sd_mm,
              speaker_offset_sd_mm, formant_jitter_hz, seed):
    """Generate a synthetic training corpus plus its ground-truth sidecar."""
    spec = SynthSpec(
        n_speakers=speakers,
        tokens_per_item=tokens_per_item,
        noise_sd_mm=noise_sd_mm,
        speaker_offset_sd_mm=speaker_offset_sd_mm,
        formant_jitter_hz=formant_jitter_hz,
    )
    corp, truth = synth_corpus(spec, seed=seed)
    save_corpus(corp, out_path)
    if truth_path is None:
        truth_path = str(Path(out_path).with_suffix(".truth.json"))
    save_ground_truth(truth, truth_path)
    _diag(
        f"wrote {out_path}: {len(corp.records)} rows "
        f"({speakers} speakers x {len(spec.item_templates)} items x "
        f"{tokens_per_item} reps), truth sidecar {truth_path}"
    )


# -- serve --------------------------------------------------------------------


@cli.command("serve")
@click.option("--model", "model_path", required=True, metavar="JSON")
@click.option("--lut", "lut_path", required=True, metavar="BIN")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=click.IntRange(1, 65535), default=8572, show_default=True)
@click.option("--device", default=None, help="Input device name substring.")
@click.option("--wav", "wav_path", default=None, metavar="WAV",
              help="Loop a recording instead of capturing from a microphone.")
@click.option("--static", "static_dir", default=None, metavar="DIR",
              help="Also serve a client UI from this directory.")
@click.option("--sample-rate", type=_positive, default=None,
              help="Capture rate; defaults to the WAV rate or 44100.")
@click.option("--frame-size", type=click.IntRange(min=8), default=None)
@click.option("--hop-size", type=click.IntRange(min=1), default=None)
@click.option("--lpc-order", type=click.IntRange(min=2), default=None)
@click.option("--preemphasis", type=click.FloatRange(0.0, 1.0, max_open=True), default=None)
@click.option("--threshold-db", type=float, default=None)
def cmd_serve(model_path, lut_path, host, port, device, wav_path, static_dir,
              **config_flags):
    """Run the realtime biofeedback websocket service."""
    from .lut import load_lut
    from .service import Session, create_app, wav_source_factory

    bundle = load_bundle(model_path)
    table = load_lut(lut_path)
    if bundle_digest(bundle) != table.model_digest:
        _diag(
            "warning: lookup table was compiled from a different model "
            "(digest mismatch); serving anyway"
        )
    source_factory = None
    sample_rate = config_flags.pop("sample_rate", None)
    if wav_path is not None:
        signal, wav_rate = _read_wav_checked(wav_path)
        source_factory = wav_source_factory(signal, wav_rate)
        if sample_rate is None:
            sample_rate = wav_rate
        elif sample_rate != wav_rate:
            _diag(
                f"warning: analysing a {wav_rate:g} Hz recording at "
                f"{sample_rate:g} Hz"
            )
    overrides = {k: v for k, v in config_flags.items() if v is not None}
    if sample_rate is not None:
        overrides["sample_rate"] = float(sample_rate)
    config = AnalysisConfig(**overrides)
    session = Session(
        bundle, table, config=config, source_factory=source_factory, device=device
    )
    app = create_app(session)
    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    _diag(f"serving ws://{host}:{port}/ws")
    import uvicorn

    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except (OSError, SystemExit) as exc:
        raise RuntimeFailure(f"server failed on {host}:{port}: {exc}") from None


# -- entry point ---------------------------------------------------------------


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except GridTooLargeError as exc:
        _diag(f"error: {exc}")
        return 1
    except DataError as exc:
        _diag(f"error: {exc}")
        return 2
    except RuntimeFailure as exc:
        _diag(f"error: {exc}")
        return 3
    except OSError as exc:
        _diag(f"error: {exc}")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
