"""Real-time formant estimation via Linear Predictive Coding.

Per hop: amplitude gate in dBFS, preemphasis, Hamming window, LPC by the
autocorrelation method (Levinson-Durbin), then formant candidates from
the roots of the prediction polynomial A(z) = 1 - sum a_k z^-k. A
spectral envelope from the all-pole model accompanies every frame so a
display can draw the spectrum even while the gate is closed.

dBFS convention: a full-scale sine has RMS amplitude 1/sqrt(2), i.e.
reads -3.01 dBFS. Thresholds are RMS values against that scale.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

DB_FLOOR = -200.0
MIN_FORMANT_HZ = 90.0
NYQUIST_GUARD_HZ = 50.0


def _default_lpc_order(sample_rate: float) -> int:
    # classic heuristic: two poles per kHz plus two for spectral tilt
    return 2 + int(round(sample_rate / 1000.0))


@dataclass(frozen=True)
class AnalysisConfig:
    sample_rate: float = 44100.0
    frame_size: int = 1024
    hop_size: int | None = None
    lpc_order: int | None = None
    preemphasis: float = 0.97
    threshold_db: float = -40.0
    max_formants: int = 4
    max_bandwidth_hz: float = 400.0
    n_fft: int = 512

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ConfigError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.hop_size is None:
            object.__setattr__(self, "hop_size", max(1, int(round(self.sample_rate / 100.0))))
        if self.lpc_order is None:
            object.__setattr__(self, "lpc_order", _default_lpc_order(self.sample_rate))
        if self.lpc_order < 2:
            raise ConfigError(f"lpc_order must be >= 2, got {self.lpc_order}")
        if self.frame_size < self.lpc_order + 1:
            raise ConfigError(
                f"frame_size {self.frame_size} must be >= lpc_order + 1 = {self.lpc_order + 1}"
            )
        if not 1 <= self.hop_size <= self.frame_size:
            raise ConfigError(
                f"hop_size {self.hop_size} must be in 1..frame_size ({self.frame_size})"
            )
        if not 0.0 <= self.preemphasis < 1.0:
            raise ConfigError(f"preemphasis must be in [0, 1), got {self.preemphasis}")
        if self.max_formants < 1:
            raise ConfigError(f"max_formants must be >= 1, got {self.max_formants}")
        if self.max_bandwidth_hz <= 0:
            raise ConfigError(f"max_bandwidth_hz must be positive, got {self.max_bandwidth_hz}")
        n = self.n_fft
        if n < 256 or n & (n - 1):
            raise ConfigError(f"n_fft must be a power of two >= 256, got {n}")


@dataclass(frozen=True)
class Formant:
    freq_hz: float
    bandwidth_hz: float


@dataclass(frozen=True, eq=False)
class FormantFrame:
    t_ms: float
    rms_db: float
    voiced: bool
    formants: tuple[Formant, ...]
    envelope_db: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class LpcResult:
    """Forward predictor a_1..a_p, residual energy, reflection coefficients."""

    coefficients: np.ndarray
    gain: float
    reflections: np.ndarray


def preemphasize(frame: np.ndarray, a: float) -> np.ndarray:
    """First-difference high-pass y[n] = x[n] - a*x[n-1], y[0] = x[0]."""
    frame = np.asarray(frame, dtype=np.float64)
    out = frame.copy()
    out[1:] -= a * frame[:-1]
    return out


def _autocorrelation(frame: np.ndarray, lags: int) -> np.ndarray:
    n = len(frame)
    return np.array([np.dot(frame[k:], frame[: n - k]) for k in range(lags + 1)])


def lpc_coefficients(frame: np.ndarray, order: int) -> LpcResult:
    """Autocorrelation-method LPC solved by Levinson-Durbin.

    The returned gain is the final forward prediction error energy. An
    all-zero frame yields the flat-spectrum sentinel (zero coefficients,
    zero gain) rather than an error.
    """
    frame = np.asarray(frame, dtype=np.float64)
    if order >= len(frame):
        raise ValueError(f"order {order} must be below frame length {len(frame)}")
    r = _autocorrelation(frame, order)
    if r[0] <= 0.0:
        return LpcResult(
            coefficients=np.zeros(order), gain=0.0, reflections=np.zeros(order)
        )
    a = np.zeros(order)
    reflections = np.zeros(order)
    err = r[0]
    for i in range(order):
        acc = r[i + 1] - np.dot(a[:i], r[i:0:-1])
        k = acc / err
        reflections[i] = k
        a[: i + 1] = np.concatenate([a[:i] - k * a[i - 1 :: -1], [k]]) if i else [k]
        err *= 1.0 - k * k
        if err <= 0.0:
            # numerically singular; stop early with what we have
            err = 0.0
            break
    return LpcResult(coefficients=a, gain=float(err), reflections=reflections)


def formants_from_lpc(
    coefficients: np.ndarray,
    sample_rate: float,
    max_formants: int = 4,
    max_bandwidth_hz: float = 400.0,
) -> list[Formant]:
    """Formant candidates from the roots of the prediction polynomial.

    Upper-half-plane roots map to freq = angle * sr / (2 pi) and
    bandwidth = -(sr / pi) * ln|root|. Candidates below 90 Hz, within
    50 Hz of Nyquist, or wider than max_bandwidth_hz are discarded.
    Raises numpy's LinAlgError if the eigenvalue root finder fails; the
    caller counts such frames as dropped.
    """
    poly = np.concatenate([[1.0], -np.asarray(coefficients, dtype=np.float64)])
    roots = np.roots(poly)
    nyquist = sample_rate / 2.0
    found = []
    for root in roots:
        if root.imag <= 0.0:
            continue
        radius = abs(root)
        if radius < 1e-12:
            continue
        freq = float(np.arctan2(root.imag, root.real) * sample_rate / (2.0 * np.pi))
        bandwidth = float(-np.log(radius) * sample_rate / np.pi)
        if freq < MIN_FORMANT_HZ or freq > nyquist - NYQUIST_GUARD_HZ:
            continue
        if bandwidth <= 0.0 or bandwidth > max_bandwidth_hz:
            continue
        found.append(Formant(freq_hz=freq, bandwidth_hz=bandwidth))
    found.sort(key=lambda f: f.freq_hz)
    return found[:max_formants]


def lpc_envelope(coefficients: np.ndarray, gain: float, n_fft: int) -> np.ndarray:
    """All-pole spectral envelope 20*log10(sqrt(gain)/|A|) at n_fft/2 + 1
    uniformly spaced frequencies from 0 to Nyquist, floored at -200 dB."""
    a = np.asarray(coefficients, dtype=np.float64)
    poly = np.concatenate([[1.0], -a])
    spectrum = np.fft.rfft(poly, n_fft)
    mag = np.abs(spectrum)
    with np.errstate(divide="ignore"):
        env = 10.0 * np.log10(max(gain, 0.0)) - 20.0 * np.log10(np.maximum(mag, 1e-300))
    return np.maximum(env, DB_FLOOR)


def rms_dbfs(frame: np.ndarray) -> float:
    rms = float(np.sqrt(np.mean(np.square(frame, dtype=np.float64))))
    if rms <= 0.0:
        return DB_FLOOR
    return max(20.0 * np.log10(rms), DB_FLOOR)


def analyze_frame(samples: np.ndarray, config: AnalysisConfig, t_ms: float) -> FormantFrame:
    """One full analysis pass over a frame_size-long sample window."""
    level_db = rms_dbfs(samples)
    emphasized = preemphasize(samples, config.preemphasis)
    windowed = emphasized * np.hamming(len(emphasized))
    lpc = lpc_coefficients(windowed, config.lpc_order)
    envelope = lpc_envelope(lpc.coefficients, lpc.gain, config.n_fft)
    voiced = level_db >= config.threshold_db
    formants: tuple[Formant, ...] = ()
    if voiced:
        formants = tuple(
            formants_from_lpc(
                lpc.coefficients,
                config.sample_rate,
                max_formants=config.max_formants,
                max_bandwidth_hz=config.max_bandwidth_hz,
            )
        )
    return FormantFrame(
        t_ms=float(t_ms),
        rms_db=level_db,
        voiced=bool(voiced),
        formants=formants,
        envelope_db=envelope,
    )


class StreamTracker:
    """Single-consumer incremental tracker: feed sample blocks of any size,
    collect FormantFrames every hop_size samples.

    Frames whose root finding fails are counted in dropped_frames and
    skipped, never raised.
    """

    def __init__(self, config: AnalysisConfig):
        self.config = config
        self._buffer = np.empty(0, dtype=np.float64)
        self._frame_index = 0
        self.dropped_frames = 0

    def feed(self, block: np.ndarray) -> list[FormantFrame]:
        block = np.asarray(block, dtype=np.float64).ravel()
        self._buffer = np.concatenate([self._buffer, block])
        cfg = self.config
        out = []
        while len(self._buffer) >= cfg.frame_size:
            window = self._buffer[: cfg.frame_size]
            t_ms = self._frame_index * cfg.hop_size / cfg.sample_rate * 1000.0
            try:
                out.append(analyze_frame(window, cfg, t_ms))
            except np.linalg.LinAlgError:
                self.dropped_frames += 1
            self._frame_index += 1
            self._buffer = self._buffer[cfg.hop_size :]
        return out


def track(signal: np.ndarray, config: AnalysisConfig) -> list[FormantFrame]:
    """Offline tracking of a whole signal; deterministic for fixed input."""
    tracker = StreamTracker(config)
    return tracker.feed(signal)


# ---------------------------------------------------------------------------
# WAV input and frame CSV round trip
# ---------------------------------------------------------------------------

def read_wav(path) -> tuple[np.ndarray, float]:
    """Mono float64 signal in [-1, 1] plus sample rate. 16-bit PCM and
    32-bit float files supported; multichannel input keeps channel 0."""
    from scipy.io import wavfile

    sr, data = wavfile.read(path)
    if data.ndim > 1:
        data = data[:, 0]
    if data.dtype == np.int16:
        signal = data.astype(np.float64) / 32768.0
    elif data.dtype == np.int32:
        signal = data.astype(np.float64) / 2147483648.0
    elif data.dtype in (np.float32, np.float64):
        signal = data.astype(np.float64)
    else:
        raise ValueError(f"unsupported WAV sample format {data.dtype}")
    return signal, float(sr)


FRAME_CSV_COLUMNS = ["t_ms", "rms_db", "voiced"] + [
    name for i in range(1, 5) for name in (f"f{i}", f"b{i}")
]


def frames_to_csv(frames) -> str:
    """t_ms, rms_db, voiced, then four freq/bandwidth pairs; missing
    formants stay empty. The envelope is display-only and not exported."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(FRAME_CSV_COLUMNS)
    for fr in frames:
        row = [repr(float(fr.t_ms)), repr(float(fr.rms_db)), int(fr.voiced)]
        for i in range(4):
            if i < len(fr.formants):
                row.append(repr(float(fr.formants[i].freq_hz)))
                row.append(repr(float(fr.formants[i].bandwidth_hz)))
            else:
                row.extend(["", ""])
        writer.writerow(row)
    return out.getvalue()


def frames_from_csv(text: str) -> list[FormantFrame]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != FRAME_CSV_COLUMNS:
        raise ValueError("unrecognized frame CSV header")
    frames = []
    for row in reader:
        if not row:
            continue
        formants = []
        for i in range(4):
            f_raw, b_raw = row[3 + 2 * i], row[4 + 2 * i]
            if f_raw != "":
                formants.append(Formant(freq_hz=float(f_raw), bandwidth_hz=float(b_raw)))
        frames.append(
            FormantFrame(
                t_ms=float(row[0]),
                rms_db=float(row[1]),
                voiced=bool(int(row[2])),
                formants=tuple(formants),
                envelope_db=None,
            )
        )
    return frames
