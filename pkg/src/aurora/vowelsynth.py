"""Deterministic vowel synthesis for tests and demo input.

An impulse train at the glottal rate drives a cascade of second-order
resonators, one per planted formant. Good enough for LPC to recover the
planted resonances; not meant to sound natural.
"""
from __future__ import annotations

import numpy as np
from scipy.signal import lfilter


def resonator_coefficients(freq_hz: float, bandwidth_hz: float, sample_rate: float):
    """Klatt-style two-pole resonator with unity gain at DC."""
    r = np.exp(-np.pi * bandwidth_hz / sample_rate)
    theta = 2.0 * np.pi * freq_hz / sample_rate
    c1 = 2.0 * r * np.cos(theta)
    c2 = -r * r
    b0 = 1.0 - c1 - c2
    return np.array([b0]), np.array([1.0, -c1, -c2])


def synth_vowel(
    formants,
    duration_s: float = 1.0,
    sample_rate: float = 16000.0,
    f0_hz: float = 120.0,
    peak: float = 0.5,
) -> np.ndarray:
    """Impulse train through the resonator cascade, scaled to the given
    peak amplitude. formants is a sequence of (freq_hz, bandwidth_hz)."""
    n = int(round(duration_s * sample_rate))
    period = max(1, int(round(sample_rate / f0_hz)))
    signal = np.zeros(n)
    signal[::period] = 1.0
    for freq, bandwidth in formants:
        b, a = resonator_coefficients(freq, bandwidth, sample_rate)
        signal = lfilter(b, a, signal)
    top = np.abs(signal).max()
    if top > 0:
        signal = signal * (peak / top)
    return signal


def write_wav(path, signal: np.ndarray, sample_rate: float, dtype: str = "int16") -> None:
    from scipy.io import wavfile

    signal = np.asarray(signal, dtype=np.float64)
    if dtype == "int16":
        clipped = np.clip(signal, -1.0, 1.0 - 1.0 / 32768.0)
        wavfile.write(path, int(sample_rate), (clipped * 32768.0).astype(np.int16))
    elif dtype == "float32":
        wavfile.write(path, int(sample_rate), signal.astype(np.float32))
    else:
        raise ValueError(f"unsupported WAV dtype {dtype!r}")
