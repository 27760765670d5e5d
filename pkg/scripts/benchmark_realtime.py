"""Latency benchmark for the realtime path.

Measures the per-frame cost of tracker feed + table lookup + JSON
serialization at a 100 frames/s hop, across a sweep of LPC orders, plus
raw lookup-table query latency. The per-frame p99 must stay under the
frame period with headroom for the event loop and the socket.

Usage: python3 scripts/benchmark_realtime.py [--sample-rate 44100]
"""
import argparse
import json
import time

import numpy as np

from aurora.corpus import SynthSpec, synth_corpus
from aurora.formants import AnalysisConfig, StreamTracker
from aurora.lut import compile_lut, query_lut
from aurora.regress import train_model
from aurora.service import Session, wav_source_factory
from aurora.vowelsynth import synth_vowel


def frame_sweep(session, signal, sr, orders):
    print(f"{'order':>6s} {'frames':>7s} {'median_ms':>10s} {'p99_ms':>8s} "
          f"{'max_ms':>8s} {'rate_fps':>9s}")
    for order in orders:
        config = AnalysisConfig(sample_rate=sr, lpc_order=order)
        tracker = StreamTracker(config)
        session._config = config
        session._ema = None
        hop = config.hop_size
        times = []
        for start in range(0, len(signal) - hop, hop):
            block = signal[start:start + hop]
            t0 = time.perf_counter()
            for frame in tracker.feed(block):
                payload = session.build_frame(frame)
                json.dumps(payload)
            times.append(time.perf_counter() - t0)
        times = np.array(times[5:]) * 1e3  # drop warmup frames
        rate = 1e3 / times.mean()
        print(f"{order:>6d} {len(times):>7d} {np.median(times):>10.3f} "
              f"{np.percentile(times, 99):>8.3f} {times.max():>8.3f} "
              f"{rate:>9.0f}")


def query_latency(table, rng, n=2000):
    f1 = rng.uniform(table.header.f1_lo, table.header.f1_hi, n)
    f2 = rng.uniform(table.header.f2_lo, table.header.f2_hi, n)
    query_lut(table, f1[0], f2[0])  # warm caches
    times = []
    for i in range(n):
        t0 = time.perf_counter()
        query_lut(table, f1[i], f2[i])
        times.append(time.perf_counter() - t0)
    times = np.array(times) * 1e6
    print(f"lookup queries: median {np.median(times):.1f} us, "
          f"p99 {np.percentile(times, 99):.1f} us over {n} draws")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sample-rate", type=float, default=44100.0)
    parser.add_argument("--duration-s", type=float, default=3.0)
    parser.add_argument("--orders", type=int, nargs="+",
                        default=[12, 18, 24, 46])
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    print("== preparing model + table ==")
    corp, _ = synth_corpus(SynthSpec(n_speakers=10, tokens_per_item=3,
                                     noise_sd_mm=0.0), seed=5)
    bundle = train_model(corp)
    t0 = time.perf_counter()
    table = compile_lut(bundle, 320.0, 903.0, 828.0, 2616.0, step=10.0)
    print(f"   compile: {table.header.n1} x {table.header.n2} nodes in "
          f"{time.perf_counter() - t0:.2f} s")

    query_latency(table, rng)

    sr = args.sample_rate
    signal = synth_vowel([(700.0, 80.0), (1100.0, 120.0), (2400.0, 160.0)],
                         duration_s=args.duration_s, sample_rate=sr,
                         f0_hz=100.0)
    session = Session(bundle, table,
                      config=AnalysisConfig(sample_rate=sr),
                      source_factory=wav_source_factory(signal, sr))
    budget_ms = 1e3 * AnalysisConfig(sample_rate=sr).hop_size / sr
    print(f"== per-frame cost at {sr:g} Hz (budget {budget_ms:.1f} ms/frame) ==")
    frame_sweep(session, signal, sr, args.orders)


if __name__ == "__main__":
    main()
