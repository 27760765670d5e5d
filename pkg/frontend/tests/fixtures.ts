// Canned wire messages mirroring what the service actually sends.

import type { AckConfig, FrameMessage } from "../src/protocol.js";

export function ackConfig(overrides: Partial<AckConfig> = {}): AckConfig {
  return {
    sample_rate: 44100,
    frame_size: 1024,
    hop_size: 441,
    lpc_order: 46,
    preemphasis: 0.97,
    threshold_db: -40,
    max_formants: 4,
    max_bandwidth_hz: 400,
    n_fft: 512,
    highlight: [],
    display_smoothing: 0,
    device: null,
    lut: { f1_lo: 320, f1_hi: 903, f2_lo: 828, f2_hi: 2616 },
    model_digest: "ab".repeat(32),
    ...overrides,
  };
}

export function frame(overrides: Partial<FrameMessage> = {}): FrameMessage {
  const n = 100;
  const xs = Array.from({ length: n }, (_, i) => 60 - i * 0.6);
  const ys = Array.from({ length: n }, (_, i) => 10 + Math.sin(i / 20) * 8);
  return {
    type: "frame",
    t_ms: 10,
    rms_db: -20.5,
    voiced: true,
    formants: [
      { f: 700.12, bw: 80 },
      { f: 1100.5, bw: 120 },
      { f: 2400, bw: 160 },
    ],
    envelope_db: Array.from({ length: 256 }, (_, i) => -30 + (i % 17)),
    contour: { x: xs, y: ys },
    extrapolated: false,
    highlight: [],
    dropped: 0,
    ...overrides,
  };
}
