"""Realtime biofeedback service.

A capture thread reads sample blocks from an audio source, an analysis
thread turns them into formant frames and tongue contours, and a
broadcast hub fans completed display frames out to websocket clients.
Capture is lazy: it starts with the first subscriber and stops when the
last one leaves. Every client has its own bounded queue; when a client
cannot keep up its oldest pending frames are discarded and the frame
payload carries that client's cumulative drop count.

Threading model: subscribe/unsubscribe/apply_config run on the event
loop thread (they are only called from the websocket handler), capture
and analysis each get a daemon thread, and the analysis thread hops back
onto the loop with call_soon_threadsafe to enqueue payloads. The only
state shared across threads is the client map and loop reference, both
guarded by one lock that is never held across a blocking call.
"""
from __future__ import annotations

import asyncio
import contextlib
import dataclasses
import json
import threading
from collections import deque
from dataclasses import dataclass

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .audio import BlockQueue, DeviceSource, WavLoopSource, list_input_devices
from .errors import AuroraError, ConfigError
from .formants import AnalysisConfig, FormantFrame, StreamTracker
from .lut import LookupTable, bundle_digest, query_lut
from .regress import ModelBundle

ENVELOPE_POINTS = 256
CLIENT_QUEUE_FRAMES = 32
HIGHLIGHT_CHOICES = (1, 2, 3, 4)

_ANALYSIS_INT_FIELDS = frozenset(
    {"frame_size", "hop_size", "lpc_order", "max_formants", "n_fft"}
)


@dataclass
class SessionState:
    """Mutable per-session display settings alongside the analysis config."""

    config: AnalysisConfig
    highlight: frozenset = frozenset()
    display_smoothing: float = 0.0
    device: str | None = None


class ClientHandle:
    """One subscriber's outbound queue. Touched only on the event loop
    thread, so no locking is needed. Control payloads (acks) are never
    dropped; frames are, oldest first."""

    def __init__(self, capacity: int = CLIENT_QUEUE_FRAMES):
        self.pending: deque = deque()
        self.capacity = capacity
        self.dropped = 0
        self.ready = asyncio.Event()
        self.client_id: int | None = None

    def offer(self, kind: str, payload: dict) -> None:
        if kind == "frame" and self._frame_count() >= self.capacity:
            for i, (k, _) in enumerate(self.pending):
                if k == "frame":
                    del self.pending[i]
                    self.dropped += 1
                    break
        self.pending.append((kind, payload))
        self.ready.set()

    def _frame_count(self) -> int:
        return sum(1 for k, _ in self.pending if k == "frame")


class Session:
    """Owns the model, the lookup table, capture threads, and subscribers.

    source_factory(config, device) builds the audio source; injecting it
    keeps the service testable without a microphone.
    """

    def __init__(
        self,
        bundle: ModelBundle,
        lut: LookupTable,
        config: AnalysisConfig | None = None,
        source_factory=None,
        device_lister=list_input_devices,
        highlight=(),
        display_smoothing: float = 0.0,
        device: str | None = None,
    ):
        self.bundle = bundle
        self.lut = lut
        self.state = SessionState(
            config=config if config is not None else AnalysisConfig(),
            highlight=_validate_highlight(highlight),
            display_smoothing=_validate_smoothing(display_smoothing),
            device=device,
        )
        self.source_factory = source_factory or _default_source_factory
        self.device_lister = device_lister
        self.digest_mismatch = bundle_digest(bundle) != lut.model_digest

        self._clients: dict[int, ClientHandle] = {}
        self._next_client_id = 0
        self._loop: asyncio.AbstractEventLoop | None = None
        self._lock = threading.Lock()
        self._running = threading.Event()
        self._threads: list[threading.Thread] = []
        self._source = None
        self._ema: tuple[float, float] | None = None

    # -- subscriptions ---------------------------------------------------

    def subscribe(self, loop: asyncio.AbstractEventLoop) -> ClientHandle:
        handle = ClientHandle()
        with self._lock:
            self._loop = loop
            self._next_client_id += 1
            handle.client_id = self._next_client_id
            self._clients[handle.client_id] = handle
            first = len(self._clients) == 1
        if first:
            try:
                self._start_capture()
            except Exception:
                self.unsubscribe(handle)
                raise
        return handle

    def unsubscribe(self, handle: ClientHandle) -> None:
        with self._lock:
            self._clients.pop(handle.client_id, None)
            last = not self._clients
        if last:
            self._stop_capture()
            with self._lock:
                if not self._clients:
                    self._loop = None

    @property
    def client_count(self) -> int:
        with self._lock:
            return len(self._clients)

    # -- capture lifecycle -------------------------------------------------

    def _start_capture(self) -> None:
        config = self.state.config
        self._source = self.source_factory(config, self.state.device)
        self._blocks = BlockQueue(capacity=8)
        self._tracker = StreamTracker(config)
        self._ema = None
        self._running.set()
        pump = threading.Thread(target=self._pump, daemon=True)
        crunch = threading.Thread(target=self._analyze, daemon=True)
        self._threads = [pump, crunch]
        pump.start()
        crunch.start()

    def _stop_capture(self) -> None:
        self._running.clear()
        if self._source is not None:
            self._source.stop()
        for t in self._threads:
            t.join(timeout=2.0)
        self._threads = []
        self._source = None

    def _restart_if_running(self) -> None:
        if self._running.is_set():
            self._stop_capture()
            self._start_capture()

    def _pump(self) -> None:
        try:
            for block in self._source.blocks():
                if not self._running.is_set():
                    break
                self._blocks.put(block)
        except Exception:
            self._running.clear()

    def _analyze(self) -> None:
        tracker = self._tracker
        blocks = self._blocks
        while self._running.is_set():
            block = blocks.get(timeout=0.1)
            if block is None:
                continue
            for frame in tracker.feed(block):
                self._broadcast("frame", self.build_frame(frame))

    # -- fan-out -----------------------------------------------------------

    def _broadcast(self, kind: str, payload: dict) -> None:
        with self._lock:
            loop = self._loop
        if loop is None:
            return
        try:
            loop.call_soon_threadsafe(self._offer_all, kind, payload)
        except RuntimeError:
            pass

    def _offer_all(self, kind: str, payload: dict) -> None:
        with self._lock:
            handles = list(self._clients.values())
        for handle in handles:
            handle.offer(kind, payload)

    # -- frame assembly ------------------------------------------------------

    def build_frame(self, frame: FormantFrame) -> dict:
        """Wire payload for one analysis frame.

        {"type": "frame", "t_ms", "rms_db", "voiced",
         "formants": [{"f", "bw"}, ...], "envelope_db": [256 floats],
         "contour": {"x": [100], "y": [100]} | null, "extrapolated": bool,
         "highlight": [ints], "dropped": n}

        The dropped count is stamped per client at send time. Stream
        payloads are rounded for bandwidth (0.1 um on contours); slider
        responses go out at full precision instead.
        """
        contour_payload = None
        extrapolated = False
        if frame.voiced and len(frame.formants) >= 2:
            f1 = frame.formants[0].freq_hz
            f2 = frame.formants[1].freq_hz
            f1, f2 = self._smooth(f1, f2)
            contour = query_lut(self.lut, f1, f2)
            extrapolated = contour.extrapolated
            contour_payload = {
                "x": [round(float(v), 4) for v in contour.points[:, 0]],
                "y": [round(float(v), 4) for v in contour.points[:, 1]],
            }
        return {
            "type": "frame",
            "t_ms": round(float(frame.t_ms), 3),
            "rms_db": round(float(frame.rms_db), 2),
            "voiced": bool(frame.voiced),
            "formants": [
                {"f": round(float(f.freq_hz), 2), "bw": round(float(f.bandwidth_hz), 2)}
                for f in frame.formants
            ],
            "envelope_db": _envelope_payload(frame.envelope_db),
            "contour": contour_payload,
            "extrapolated": bool(extrapolated),
            "highlight": sorted(self.state.highlight),
            "dropped": 0,
        }

    def _smooth(self, f1: float, f2: float) -> tuple[float, float]:
        coeff = self.state.display_smoothing
        if coeff == 0.0:
            # explicit bypass: zero smoothing must be bit-exact passthrough
            return f1, f2
        if self._ema is not None:
            f1 = coeff * self._ema[0] + (1.0 - coeff) * f1
            f2 = coeff * self._ema[1] + (1.0 - coeff) * f2
        self._ema = (f1, f2)
        return f1, f2

    # -- control messages ----------------------------------------------------

    def ack_payload(self) -> dict:
        """{"type": "ack", "config": {...}} with the full effective state."""
        config = self.state.config
        payload = {name: getattr(config, name) for name in _ANALYSIS_FIELDS}
        payload["highlight"] = sorted(self.state.highlight)
        payload["display_smoothing"] = self.state.display_smoothing
        payload["device"] = self.state.device
        payload["lut"] = {
            "f1_lo": self.lut.header.f1_lo,
            "f1_hi": self.lut.header.f1_hi,
            "f2_lo": self.lut.header.f2_lo,
            "f2_hi": self.lut.header.f2_hi,
        }
        payload["model_digest"] = self.lut.model_digest
        return {"type": "ack", "config": payload}

    def apply_config(self, changes: dict) -> dict:
        """Validate and apply a partial config update, restarting capture
        between hops when it is live. Returns the ack payload. Raises
        ConfigError naming the offending field; state is untouched then."""
        analysis_changes = {}
        highlight = None
        smoothing = None
        device = _UNSET
        for key, value in changes.items():
            if key in _ANALYSIS_FIELDS:
                analysis_changes[key] = _coerce_analysis_value(key, value)
            elif key == "highlight":
                highlight = _validate_highlight(value)
            elif key == "display_smoothing":
                smoothing = _validate_smoothing(value)
            elif key == "device":
                if value is not None and not isinstance(value, str):
                    raise ConfigError("device must be a string or null")
                device = value
            else:
                raise ConfigError(f"unknown config field {key!r}")
        config = self.state.config
        if analysis_changes:
            config = dataclasses.replace(config, **analysis_changes)
        self.state.config = config
        if highlight is not None:
            self.state.highlight = highlight
        if smoothing is not None:
            self.state.display_smoothing = smoothing
        if device is not _UNSET:
            self.state.device = device
        if analysis_changes or device is not _UNSET:
            self._restart_if_running()
        return self.ack_payload()

    def invert_payload(self, request_id, f1, f2) -> dict:
        """{"type": "contour", "id", "contour": {"x", "y"}, "extrapolated"}.

        Full precision: values survive a JSON round trip bit-exactly, so
        clients can cross-check against exported contour CSVs."""
        for name, value in (("f1", f1), ("f2", f2)):
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ConfigError(f"{name} must be a number")
            if not np.isfinite(value) or value <= 0:
                raise ConfigError(f"{name} must be a positive finite number")
        contour = query_lut(self.lut, float(f1), float(f2))
        return {
            "type": "contour",
            "id": request_id,
            "contour": {
                "x": [float(v) for v in contour.points[:, 0]],
                "y": [float(v) for v in contour.points[:, 1]],
            },
            "extrapolated": bool(contour.extrapolated),
        }

    def handle_message(self, raw: str) -> list[dict]:
        """Process one client text message. Returns payloads to unicast to
        that client; acks after config changes broadcast to everyone."""
        try:
            message = json.loads(raw)
        except (json.JSONDecodeError, UnicodeDecodeError):
            return [_error(None, "malformed JSON")]
        if not isinstance(message, dict) or "type" not in message:
            return [_error(None, "message must be an object with a 'type' field")]
        kind = message["type"]
        request_id = message.get("id")
        if kind == "config":
            changes = {k: v for k, v in message.items() if k not in ("type", "id")}
            try:
                ack = self.apply_config(changes)
            except ConfigError as exc:
                return [_error(request_id, str(exc))]
            self._broadcast("control", ack)
            return []
        if kind == "invert":
            try:
                return [self.invert_payload(request_id, message.get("f1"), message.get("f2"))]
            except ConfigError as exc:
                return [_error(request_id, str(exc))]
        if kind == "list_devices":
            return [{"type": "devices", "names": list(self.device_lister())}]
        return [_error(request_id, f"unknown message type {kind!r}")]


_ANALYSIS_FIELDS = tuple(f.name for f in dataclasses.fields(AnalysisConfig))
_UNSET = object()


def _error(request_id, message: str) -> dict:
    return {"type": "error", "id": request_id, "message": message}


def _coerce_analysis_value(key: str, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number")
    if key in _ANALYSIS_INT_FIELDS:
        if float(value) != int(value):
            raise ConfigError(f"{key} must be an integer, got {value}")
        return int(value)
    return float(value)


def _validate_highlight(value) -> frozenset:
    if not isinstance(value, (list, tuple, set, frozenset)):
        raise ConfigError("highlight must be a list of formant indices")
    items = set()
    for item in value:
        if isinstance(item, bool) or item not in HIGHLIGHT_CHOICES:
            raise ConfigError("highlight entries must be formant indices 1 to 4")
        items.add(int(item))
    return frozenset(items)


def _validate_smoothing(value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError("display_smoothing must be a number")
    value = float(value)
    if not np.isfinite(value) or not 0.0 <= value < 1.0:
        raise ConfigError("display_smoothing must be in [0, 1)")
    return value


def _envelope_payload(envelope_db: np.ndarray | None) -> list:
    if envelope_db is None:
        return []
    env = np.asarray(envelope_db, dtype=np.float64)
    if len(env) != ENVELOPE_POINTS:
        grid = np.linspace(0.0, 1.0, ENVELOPE_POINTS)
        env = np.interp(grid, np.linspace(0.0, 1.0, len(env)), env)
    return [round(float(v), 2) for v in env]


def _default_source_factory(config: AnalysisConfig, device: str | None):
    return DeviceSource(config.sample_rate, config.hop_size, device=device)


def wav_source_factory(signal: np.ndarray, sample_rate: float, real_time: bool = True):
    """Factory for serving a looped recording instead of a microphone."""

    def factory(config: AnalysisConfig, device: str | None):
        return WavLoopSource(signal, sample_rate, config.hop_size, real_time=real_time)

    return factory


def create_app(session: Session) -> FastAPI:
    """FastAPI app exposing the websocket endpoint at /ws."""
    app = FastAPI(title="aurora biofeedback service")
    app.state.session = session

    @app.websocket("/ws")
    async def websocket_endpoint(websocket: WebSocket):
        await websocket.accept()
        try:
            handle = session.subscribe(asyncio.get_running_loop())
        except AuroraError as exc:
            await websocket.send_text(json.dumps(_error(None, str(exc))))
            await websocket.close()
            return
        await websocket.send_text(json.dumps(session.ack_payload()))
        sender = asyncio.create_task(_send_loop(websocket, handle))
        try:
            while True:
                raw = await websocket.receive_text()
                for payload in session.handle_message(raw):
                    await websocket.send_text(json.dumps(payload))
        except WebSocketDisconnect:
            pass
        finally:
            sender.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await sender
            session.unsubscribe(handle)

    return app


async def _send_loop(websocket, handle: ClientHandle) -> None:
    try:
        while True:
            await handle.ready.wait()
            handle.ready.clear()
            while handle.pending:
                kind, payload = handle.pending.popleft()
                if kind == "frame":
                    payload = {**payload, "dropped": handle.dropped}
                await websocket.send_text(json.dumps(payload))
    except asyncio.CancelledError:
        raise
    except Exception:
        return
