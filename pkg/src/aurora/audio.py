"""Audio capture sources and the bounded block queue between capture and
analysis.

Sources yield fixed-size float64 sample blocks. The microphone source
wraps sounddevice lazily so the rest of the toolkit works without any
audio stack installed; the WAV-loop source paces playback in real time
and is what tests and demo sessions use.
"""
from __future__ import annotations

import threading
import time
from collections import deque

import numpy as np

from .errors import AudioDeviceError


class BlockQueue:
    """Bounded producer/consumer queue of sample blocks, drop-oldest on
    overflow. The dropped counter is cumulative."""

    def __init__(self, capacity: int = 8):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self._blocks: deque = deque()
        self._capacity = capacity
        self._lock = threading.Lock()
        self._ready = threading.Condition(self._lock)
        self.dropped = 0

    def put(self, block: np.ndarray) -> None:
        with self._ready:
            if len(self._blocks) >= self._capacity:
                self._blocks.popleft()
                self.dropped += 1
            self._blocks.append(block)
            self._ready.notify()

    def get(self, timeout: float | None = None) -> np.ndarray | None:
        with self._ready:
            if not self._blocks:
                self._ready.wait(timeout)
            if not self._blocks:
                return None
            return self._blocks.popleft()

    def __len__(self) -> int:
        with self._lock:
            return len(self._blocks)


class WavLoopSource:
    """Loops a mono signal forever in hop-sized blocks.

    real_time pacing sleeps one block duration per block so downstream
    behaves as it would with a live microphone.
    """

    def __init__(
        self,
        signal: np.ndarray,
        sample_rate: float,
        block_size: int,
        real_time: bool = True,
    ):
        signal = np.asarray(signal, dtype=np.float64).ravel()
        if len(signal) < block_size:
            signal = np.tile(signal, int(np.ceil(block_size / max(len(signal), 1))))
        self._signal = signal
        self.sample_rate = float(sample_rate)
        self.block_size = int(block_size)
        self.real_time = real_time
        self._stop = threading.Event()

    def stop(self) -> None:
        self._stop.set()

    def blocks(self):
        pos = 0
        n = len(self._signal)
        period = self.block_size / self.sample_rate
        while not self._stop.is_set():
            end = pos + self.block_size
            if end <= n:
                block = self._signal[pos:end]
            else:
                block = np.concatenate([self._signal[pos:], self._signal[: end - n]])
            pos = end % n
            if self.real_time:
                time.sleep(period)
            yield block


class DeviceSource:
    """Microphone blocks via sounddevice, selected by name substring."""

    def __init__(self, sample_rate: float, block_size: int, device: str | None = None):
        self.sample_rate = float(sample_rate)
        self.block_size = int(block_size)
        self.device = device
        self._stop = threading.Event()

    def stop(self) -> None:
        self._stop.set()

    def blocks(self):
        try:
            import sounddevice
        except ImportError:
            raise AudioDeviceError(
                "sounddevice is not installed; use a WAV source or install the mic extra"
            ) from None
        device_index = None
        if self.device is not None:
            device_index = _match_device(sounddevice.query_devices(), self.device)
        queue = BlockQueue(capacity=16)

        def callback(indata, frames, time_info, status):
            queue.put(np.array(indata[:, 0], dtype=np.float64))

        try:
            stream = sounddevice.InputStream(
                samplerate=self.sample_rate,
                blocksize=self.block_size,
                channels=1,
                dtype="float32",
                device=device_index,
                callback=callback,
            )
        except Exception as exc:
            raise AudioDeviceError(f"cannot open input stream: {exc}") from None
        with stream:
            while not self._stop.is_set():
                block = queue.get(timeout=0.25)
                if block is not None:
                    yield block


def _match_device(devices, query: str) -> int:
    lowered = query.lower()
    for i, dev in enumerate(devices):
        if dev.get("max_input_channels", 0) > 0 and lowered in dev["name"].lower():
            return i
    raise AudioDeviceError(f"no input device matching {query!r}")


def list_input_devices() -> list[str]:
    """Names of available input devices; empty when no audio stack exists."""
    try:
        import sounddevice
    except ImportError:
        return []
    try:
        devices = sounddevice.query_devices()
    except Exception:
        return []
    return [d["name"] for d in devices if d.get("max_input_channels", 0) > 0]
