"""Websocket service behaviour: frame schema, control messages, fan-out,
backpressure, and capture lifecycle."""
import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from aurora.errors import ConfigError
from aurora.formants import AnalysisConfig, Formant, FormantFrame
from aurora.lut import compile_lut, query_lut
from aurora.service import (
    ENVELOPE_POINTS,
    ClientHandle,
    Session,
    create_app,
    wav_source_factory,
)
from aurora.vowelsynth import synth_vowel

SR = 16000
TRACK_CONFIG = dict(
    sample_rate=SR, frame_size=512, hop_size=160, preemphasis=0.5, lpc_order=18
)


@pytest.fixture(scope="module")
def small_lut(trained_bundle):
    return compile_lut(trained_bundle, step=40.0)


def make_session(trained_bundle, small_lut, signal=None, **overrides):
    if signal is None:
        signal = synth_vowel(
            [(500.0, 80.0), (1500.0, 120.0), (2500.0, 160.0)],
            duration_s=0.6,
            sample_rate=SR,
            f0_hz=100.0,
        )
    kwargs = dict(TRACK_CONFIG)
    config = AnalysisConfig(**kwargs)
    return Session(
        trained_bundle,
        small_lut,
        config=config,
        source_factory=wav_source_factory(signal, SR),
        device_lister=lambda: ["loopback mic"],
        **overrides,
    )


def read_until(ws, wanted_type, limit=400):
    for _ in range(limit):
        message = ws.receive_json()
        if message["type"] == wanted_type:
            return message
    raise AssertionError(f"no {wanted_type!r} message within {limit} messages")


# -- wire schema ------------------------------------------------------------


def test_ack_sent_on_connect(trained_bundle, small_lut):
    session = make_session(trained_bundle, small_lut)
    with TestClient(create_app(session)) as client:
        with client.websocket_connect("/ws") as ws:
            ack = ws.receive_json()
    assert ack["type"] == "ack"
    config = ack["config"]
    assert config["sample_rate"] == SR
    assert config["hop_size"] == 160
    assert config["highlight"] == []
    assert config["display_smoothing"] == 0.0
    assert config["lut"]["f1_lo"] == small_lut.header.f1_lo
    assert config["lut"]["f2_hi"] == small_lut.header.f2_hi
    assert config["model_digest"] == small_lut.model_digest


def test_frame_schema_and_contour(trained_bundle, small_lut):
    session = make_session(trained_bundle, small_lut)
    with TestClient(create_app(session)) as client:
        with client.websocket_connect("/ws") as ws:
            ws.receive_json()
            frame = None
            for _ in range(200):
                message = ws.receive_json()
                if message["type"] == "frame" and message["contour"] is not None:
                    frame = message
                    break
    assert frame is not None, "no voiced frame with a contour arrived"
    assert set(frame) == {
        "type", "t_ms", "rms_db", "voiced", "formants", "envelope_db",
        "contour", "extrapolated", "highlight", "dropped",
    }
    assert frame["voiced"] is True
    assert len(frame["envelope_db"]) == ENVELOPE_POINTS
    assert len(frame["contour"]["x"]) == 100
    assert len(frame["contour"]["y"]) == 100
    assert all(set(f) == {"f", "bw"} for f in frame["formants"])
    assert isinstance(frame["extrapolated"], bool)
    assert frame["dropped"] >= 0


def test_silence_frames_have_no_contour(trained_bundle, small_lut):
    session = make_session(trained_bundle, small_lut, signal=np.zeros(SR // 2))
    with TestClient(create_app(session)) as client:
        with client.websocket_connect("/ws") as ws:
            ws.receive_json()
            frames = [read_until(ws, "frame") for _ in range(5)]
    assert all(f["voiced"] is False for f in frames)
    assert all(f["contour"] is None for f in frames)
    assert all(len(f["envelope_db"]) == ENVELOPE_POINTS for f in frames)


def test_two_clients_receive_identical_frames(trained_bundle, small_lut):
    session = make_session(trained_bundle, small_lut)
    with TestClient(create_app(session)) as client:
        with client.websocket_connect("/ws") as a, client.websocket_connect("/ws") as b:
            a.receive_json()
            b.receive_json()
            seen_a = {}
            seen_b = {}
            for _ in range(120):
                fa = a.receive_json()
                fb = b.receive_json()
                if fa["type"] == "frame":
                    seen_a[fa["t_ms"]] = fa
                if fb["type"] == "frame":
                    seen_b[fb["t_ms"]] = fb
                common = set(seen_a) & set(seen_b)
                if len(common) >= 5:
                    break
    common = set(seen_a) & set(seen_b)
    assert len(common) >= 5
    for t in common:
        fa = {k: v for k, v in seen_a[t].items() if k != "dropped"}
        fb = {k: v for k, v in seen_b[t].items() if k != "dropped"}
        assert fa == fb


# -- control messages --------------------------------------------------------


def test_config_update_broadcasts_ack(trained_bundle, small_lut):
    session = make_session(trained_bundle, small_lut)
    with TestClient(create_app(session)) as client:
        with client.websocket_connect("/ws") as ws:
            ws.receive_json()
            ws.send_text(json.dumps(
                {"type": "config", "highlight": [2, 1], "display_smoothing": 0.4}
            ))
            ack = read_until(ws, "ack")
    assert ack["config"]["highlight"] == [1, 2]
    assert ack["config"]["display_smoothing"] == 0.4
    assert session.state.highlight == frozenset({1, 2})


def test_invalid_config_rejected_naming_field(trained_bundle, small_lut):
    session = make_session(trained_bundle, small_lut)
    before = session.state.config
    with TestClient(create_app(session)) as client:
        with client.websocket_connect("/ws") as ws:
            ws.receive_json()
            ws.send_text(json.dumps({"type": "config", "lpc_order": 1}))
            error = read_until(ws, "error")
    assert "lpc_order" in error["message"]
    assert session.state.config == before


def test_unknown_config_field_rejected(trained_bundle, small_lut):
    session = make_session(trained_bundle, small_lut)
    with TestClient(create_app(session)) as client:
        with client.websocket_connect("/ws") as ws:
            ws.receive_json()
            ws.send_text(json.dumps({"type": "config", "sampel_rate": 8000}))
            error = read_until(ws, "error")
    assert "sampel_rate" in error["message"]


def test_highlight_propagates_into_frames(trained_bundle, small_lut):
    session = make_session(trained_bundle, small_lut)
    with TestClient(create_app(session)) as client:
        with client.websocket_connect("/ws") as ws:
            ws.receive_json()
            ws.send_text(json.dumps({"type": "config", "highlight": [3]}))
            read_until(ws, "ack")
            frame = read_until(ws, "frame")
            while frame["highlight"] != [3]:
                frame = read_until(ws, "frame")
    assert frame["highlight"] == [3]


def test_invert_round_trip_matches_lut_exactly(trained_bundle, small_lut):
    session = make_session(trained_bundle, small_lut)
    f1 = float(small_lut.f1_axis[1])
    f2 = float(small_lut.f2_axis[2])
    with TestClient(create_app(session)) as client:
        with client.websocket_connect("/ws") as ws:
            ws.receive_json()
            ws.send_text(json.dumps({"type": "invert", "id": "q1", "f1": f1, "f2": f2}))
            reply = read_until(ws, "contour")
    assert reply["id"] == "q1"
    expected = query_lut(small_lut, f1, f2)
    assert reply["contour"]["x"] == [float(v) for v in expected.points[:, 0]]
    assert reply["contour"]["y"] == [float(v) for v in expected.points[:, 1]]
    assert reply["extrapolated"] is False


def test_invert_rejects_nonpositive_with_matching_id(trained_bundle, small_lut):
    session = make_session(trained_bundle, small_lut)
    with TestClient(create_app(session)) as client:
        with client.websocket_connect("/ws") as ws:
            ws.receive_json()
            ws.send_text(json.dumps({"type": "invert", "id": 7, "f1": 0, "f2": 1500}))
            error = read_until(ws, "error")
    assert error["id"] == 7
    assert "f1" in error["message"]


def test_malformed_json_keeps_connection_alive(trained_bundle, small_lut):
    session = make_session(trained_bundle, small_lut)
    with TestClient(create_app(session)) as client:
        with client.websocket_connect("/ws") as ws:
            ws.receive_json()
            ws.send_text("{not json")
            error = read_until(ws, "error")
            assert error["id"] is None
            ws.send_text(json.dumps({"type": "list_devices"}))
            devices = read_until(ws, "devices")
    assert devices["names"] == ["loopback mic"]


def test_unknown_message_type_reports_error(trained_bundle, small_lut):
    session = make_session(trained_bundle, small_lut)
    with TestClient(create_app(session)) as client:
        with client.websocket_connect("/ws") as ws:
            ws.receive_json()
            ws.send_text(json.dumps({"type": "frobnicate", "id": 3}))
            error = read_until(ws, "error")
    assert error["id"] == 3
    assert "frobnicate" in error["message"]


# -- capture lifecycle --------------------------------------------------------


def test_capture_starts_and_stops_with_subscribers(trained_bundle, small_lut):
    session = make_session(trained_bundle, small_lut)
    assert not session._running.is_set()
    with TestClient(create_app(session)) as client:
        with client.websocket_connect("/ws") as ws:
            ws.receive_json()
            assert session._running.is_set()
            assert session.client_count == 1
    assert session.client_count == 0
    assert not session._running.is_set()


def test_digest_mismatch_detected(trained_bundle, small_lut, trained):
    import aurora.regress as regress

    assert not make_session(trained_bundle, small_lut).digest_mismatch
    corp, truth, _ = trained
    other = regress.train_model(corp, digest="0" * 64)
    session = Session(other, small_lut, source_factory=wav_source_factory(np.zeros(SR), SR))
    assert session.digest_mismatch


# -- frame assembly (no sockets) ----------------------------------------------


def voiced_frame(f1, f2, t_ms=0.0):
    return FormantFrame(
        t_ms=t_ms,
        rms_db=-12.0,
        voiced=True,
        formants=(Formant(f1, 80.0), Formant(f2, 120.0)),
        envelope_db=np.linspace(-40.0, 0.0, 257),
    )


def test_zero_smoothing_is_bit_exact_passthrough(trained_bundle, small_lut):
    session = make_session(trained_bundle, small_lut)
    expected = query_lut(small_lut, 500.0, 1500.0)
    frame = session.build_frame(voiced_frame(500.0, 1500.0))
    assert frame["contour"]["x"] == [round(float(v), 4) for v in expected.points[:, 0]]
    assert frame["contour"]["y"] == [round(float(v), 4) for v in expected.points[:, 1]]
    again = session.build_frame(voiced_frame(500.0, 1500.0))
    assert frame["contour"] == again["contour"]


def test_smoothing_blends_formant_pair(trained_bundle, small_lut):
    session = make_session(trained_bundle, small_lut, display_smoothing=0.5)
    session.build_frame(voiced_frame(500.0, 1500.0))
    blended = session.build_frame(voiced_frame(540.0, 1400.0))
    expected = query_lut(small_lut, 520.0, 1450.0)
    assert blended["contour"]["x"] == [round(float(v), 4) for v in expected.points[:, 0]]
    assert session._ema == (520.0, 1450.0)


def test_unvoiced_frame_keeps_ema_untouched(trained_bundle, small_lut):
    session = make_session(trained_bundle, small_lut, display_smoothing=0.5)
    session.build_frame(voiced_frame(500.0, 1500.0))
    quiet = FormantFrame(
        t_ms=10.0, rms_db=-80.0, voiced=False, formants=(),
        envelope_db=np.zeros(257),
    )
    frame = session.build_frame(quiet)
    assert frame["contour"] is None
    assert session._ema == (500.0, 1500.0)


def test_envelope_resampled_to_transport_length(trained_bundle, small_lut):
    session = make_session(trained_bundle, small_lut)
    frame = session.build_frame(voiced_frame(500.0, 1500.0))
    assert len(frame["envelope_db"]) == ENVELOPE_POINTS
    assert frame["envelope_db"][0] == -40.0
    assert frame["envelope_db"][-1] == 0.0


def test_session_validates_initial_display_settings(trained_bundle, small_lut):
    with pytest.raises(ConfigError):
        make_session(trained_bundle, small_lut, display_smoothing=1.0)
    with pytest.raises(ConfigError):
        make_session(trained_bundle, small_lut, highlight=[5])


# -- backpressure -------------------------------------------------------------


def test_client_queue_drops_oldest_frames():
    handle = ClientHandle(capacity=8)
    for i in range(12):
        handle.offer("frame", {"t_ms": i})
    assert handle.dropped == 4
    kept = [payload["t_ms"] for kind, payload in handle.pending if kind == "frame"]
    assert kept == [4, 5, 6, 7, 8, 9, 10, 11]


def test_client_queue_never_drops_control_messages():
    handle = ClientHandle(capacity=4)
    handle.offer("control", {"type": "ack"})
    for i in range(10):
        handle.offer("frame", {"t_ms": i})
    kinds = [kind for kind, _ in handle.pending]
    assert kinds.count("control") == 1
    assert kinds.count("frame") == 4
    assert handle.dropped == 6


def test_send_loop_stamps_per_client_drop_count():
    import asyncio

    from aurora.service import _send_loop

    async def run():
        handle = ClientHandle(capacity=2)
        for i in range(5):
            handle.offer("frame", {"type": "frame", "t_ms": i})
        sent = []

        class FakeSocket:
            async def send_text(self, text):
                sent.append(json.loads(text))

        task = asyncio.create_task(_send_loop(FakeSocket(), handle))
        while len(sent) < 2:
            await asyncio.sleep(0)
        task.cancel()
        return sent

    sent = asyncio.run(run())
    assert [m["t_ms"] for m in sent] == [3, 4]
    assert [m["dropped"] for m in sent] == [3, 3]
