// Client-side session state. Everything displayed as "active" comes from
// server acks; local edits are only in-flight requests until then. All
// methods run on the event loop in message arrival order.

import type {
  AckConfig,
  ContourData,
  FrameMessage,
  ServerMessage,
} from "./protocol.js";

export type ConnectionStatus = "connecting" | "open" | "closed";

export interface TrailPoint {
  f1: number;
  f2: number;
}

export interface ContourPaint {
  contour: ContourData;
  /** live = current, warning = extrapolated, dimmed = stale fallback */
  style: "live" | "warning" | "dimmed";
}

export class ViewState {
  status: ConnectionStatus = "connecting";
  /** Last server-acknowledged config; null before the first ack. */
  acked: AckConfig | null = null;
  frame: FrameMessage | null = null;
  lastContour: ContourData | null = null;
  lastExtrapolated = false;
  sliderMode = false;
  sliderF1 = 500;
  sliderF2 = 1500;
  sliderContour: ContourData | null = null;
  sliderExtrapolated = false;
  trail: TrailPoint[] = [];
  trailLength = 40;
  devices: string[] = [];
  /** Inline control-panel error (rejected edit); cleared by the next ack. */
  panelError: string | null = null;
  lastError: string | null = null;
  /** Server-side frame drops for this client, cumulative. */
  droppedTotal = 0;

  private issuedInvertId = 0;
  private shownInvertId = 0;

  setStatus(status: ConnectionStatus): void {
    this.status = status;
  }

  /** Record an invert request id handed to the server. Ids must ascend. */
  noteInvertSent(id: number): void {
    if (id > this.issuedInvertId) this.issuedInvertId = id;
  }

  setSliderMode(on: boolean): void {
    this.sliderMode = on;
    if (!on) this.sliderContour = null;
  }

  setSlider(f1: number, f2: number): void {
    this.sliderF1 = f1;
    this.sliderF2 = f2;
  }

  setTrailLength(n: number): void {
    this.trailLength = Math.max(1, Math.floor(n));
    if (this.trail.length > this.trailLength) {
      this.trail = this.trail.slice(this.trail.length - this.trailLength);
    }
  }

  applyServer(msg: ServerMessage): void {
    switch (msg.type) {
      case "ack":
        this.acked = msg.config;
        this.panelError = null;
        break;
      case "frame":
        this.applyFrame(msg);
        break;
      case "contour":
        // Ignore responses after leaving slider mode, replies we never
        // issued, and replies older than one already shown.
        if (!this.sliderMode) break;
        if (msg.id <= this.shownInvertId || msg.id > this.issuedInvertId) break;
        this.sliderContour = msg.contour;
        this.sliderExtrapolated = msg.extrapolated;
        this.shownInvertId = msg.id;
        break;
      case "devices":
        this.devices = msg.names;
        break;
      case "error":
        if (msg.id === null) this.panelError = msg.message;
        this.lastError = msg.message;
        break;
    }
  }

  private applyFrame(frame: FrameMessage): void {
    this.frame = frame;
    this.droppedTotal = frame.dropped;
    if (frame.contour !== null) {
      this.lastContour = frame.contour;
      this.lastExtrapolated = frame.extrapolated;
    }
    if (frame.voiced && frame.formants.length >= 2) {
      const f1 = frame.formants[0]!.f;
      const f2 = frame.formants[1]!.f;
      this.trail.push({ f1, f2 });
      if (this.trail.length > this.trailLength) this.trail.shift();
    }
  }
}

/** What the contour panel should draw; slider and live sources are
 * mutually exclusive, with the last seen contour as a dimmed fallback. */
export function contourPaint(state: ViewState): ContourPaint | null {
  if (state.sliderMode) {
    if (state.sliderContour !== null) {
      return {
        contour: state.sliderContour,
        style: state.sliderExtrapolated ? "warning" : "live",
      };
    }
  } else if (state.frame !== null && state.frame.contour !== null) {
    return {
      contour: state.frame.contour,
      style: state.frame.extrapolated ? "warning" : "live",
    };
  }
  if (state.lastContour !== null) {
    return { contour: state.lastContour, style: "dimmed" };
  }
  return null;
}
