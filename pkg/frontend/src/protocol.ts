// Wire types for the feedback service's JSON WebSocket protocol, plus
// defensive parsing. The server is trusted but a reconnect can land on a
// different build, so unknown or malformed messages are dropped, not thrown.

export interface FormantPeak {
  f: number;
  bw: number;
}

export interface ContourData {
  x: number[];
  y: number[];
}

export interface LutRanges {
  f1_lo: number;
  f1_hi: number;
  f2_lo: number;
  f2_hi: number;
}

export interface AckConfig {
  sample_rate: number;
  frame_size: number;
  hop_size: number;
  lpc_order: number;
  preemphasis: number;
  threshold_db: number;
  max_formants: number;
  max_bandwidth_hz: number;
  n_fft: number;
  highlight: number[];
  display_smoothing: number;
  device: string | null;
  lut: LutRanges;
  model_digest: string;
}

export interface AckMessage {
  type: "ack";
  config: AckConfig;
}

export interface FrameMessage {
  type: "frame";
  t_ms: number;
  rms_db: number;
  voiced: boolean;
  formants: FormantPeak[];
  envelope_db: number[];
  contour: ContourData | null;
  extrapolated: boolean;
  highlight: number[];
  dropped: number;
}

export interface ContourMessage {
  type: "contour";
  id: number;
  contour: ContourData;
  extrapolated: boolean;
}

export interface DevicesMessage {
  type: "devices";
  names: string[];
}

export interface ErrorMessage {
  type: "error";
  id: number | null;
  message: string;
}

export type ServerMessage =
  | AckMessage
  | FrameMessage
  | ContourMessage
  | DevicesMessage
  | ErrorMessage;

// Partial analysis/display settings; the server validates field by field.
export type ConfigPatch = Record<string, number | string | number[] | null>;

export type ClientMessage =
  | ({ type: "config" } & ConfigPatch)
  | { type: "invert"; id: number; f1: number; f2: number }
  | { type: "list_devices" };

export function encodeMessage(msg: ClientMessage): string {
  return JSON.stringify(msg);
}

function isRecord(v: unknown): v is Record<string, unknown> {
  return typeof v === "object" && v !== null && !Array.isArray(v);
}

function isNum(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

function numArray(v: unknown): number[] | null {
  if (!Array.isArray(v) || !v.every(isNum)) return null;
  return v as number[];
}

function contourData(v: unknown): ContourData | null {
  if (!isRecord(v)) return null;
  const x = numArray(v.x);
  const y = numArray(v.y);
  if (x === null || y === null || x.length !== y.length) return null;
  return { x, y };
}

function ackConfig(v: unknown): AckConfig | null {
  if (!isRecord(v)) return null;
  const numeric = [
    "sample_rate", "frame_size", "hop_size", "lpc_order", "preemphasis",
    "threshold_db", "max_formants", "max_bandwidth_hz", "n_fft",
    "display_smoothing",
  ] as const;
  for (const key of numeric) {
    if (!isNum(v[key])) return null;
  }
  const highlight = numArray(v.highlight);
  const lut = v.lut;
  if (highlight === null || !isRecord(lut)) return null;
  if (!isNum(lut.f1_lo) || !isNum(lut.f1_hi) || !isNum(lut.f2_lo) || !isNum(lut.f2_hi)) {
    return null;
  }
  if (v.device !== null && typeof v.device !== "string") return null;
  if (typeof v.model_digest !== "string") return null;
  return {
    sample_rate: v.sample_rate as number,
    frame_size: v.frame_size as number,
    hop_size: v.hop_size as number,
    lpc_order: v.lpc_order as number,
    preemphasis: v.preemphasis as number,
    threshold_db: v.threshold_db as number,
    max_formants: v.max_formants as number,
    max_bandwidth_hz: v.max_bandwidth_hz as number,
    n_fft: v.n_fft as number,
    highlight,
    display_smoothing: v.display_smoothing as number,
    device: v.device,
    lut: { f1_lo: lut.f1_lo, f1_hi: lut.f1_hi, f2_lo: lut.f2_lo, f2_hi: lut.f2_hi },
    model_digest: v.model_digest,
  };
}

function frameMessage(v: Record<string, unknown>): FrameMessage | null {
  if (!isNum(v.t_ms) || !isNum(v.rms_db) || typeof v.voiced !== "boolean") return null;
  if (typeof v.extrapolated !== "boolean" || !isNum(v.dropped)) return null;
  const envelope = numArray(v.envelope_db);
  const highlight = numArray(v.highlight);
  if (envelope === null || highlight === null) return null;
  if (!Array.isArray(v.formants)) return null;
  const formants: FormantPeak[] = [];
  for (const item of v.formants) {
    if (!isRecord(item) || !isNum(item.f) || !isNum(item.bw)) return null;
    formants.push({ f: item.f, bw: item.bw });
  }
  let contour: ContourData | null = null;
  if (v.contour !== null && v.contour !== undefined) {
    contour = contourData(v.contour);
    if (contour === null) return null;
  }
  return {
    type: "frame",
    t_ms: v.t_ms,
    rms_db: v.rms_db,
    voiced: v.voiced,
    formants,
    envelope_db: envelope,
    contour,
    extrapolated: v.extrapolated,
    highlight,
    dropped: v.dropped,
  };
}

/** Parse one server text message; null for anything off-schema. */
export function parseServerMessage(raw: string): ServerMessage | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (!isRecord(data)) return null;
  switch (data.type) {
    case "ack": {
      const config = ackConfig(data.config);
      return config === null ? null : { type: "ack", config };
    }
    case "frame":
      return frameMessage(data);
    case "contour": {
      if (!isNum(data.id) || typeof data.extrapolated !== "boolean") return null;
      const contour = contourData(data.contour);
      if (contour === null) return null;
      return { type: "contour", id: data.id, contour, extrapolated: data.extrapolated };
    }
    case "devices": {
      if (!Array.isArray(data.names) || !data.names.every((n) => typeof n === "string")) {
        return null;
      }
      return { type: "devices", names: data.names as string[] };
    }
    case "error": {
      if (typeof data.message !== "string") return null;
      const id = isNum(data.id) ? data.id : null;
      return { type: "error", id, message: data.message };
    }
    default:
      return null;
  }
}
