// WebSocket wrapper with exponential-backoff reconnect, plus the
// single-slot frame buffer that keeps rendering latest-only: frames the
// paint loop never gets to are dropped, not queued.

import type { ClientMessage, FrameMessage, ServerMessage } from "./protocol.js";
import { encodeMessage, parseServerMessage } from "./protocol.js";
import type { ConnectionStatus } from "./viewstate.js";

export function backoffDelayMs(attempt: number): number {
  return Math.min(500 * 2 ** attempt, 10_000);
}

export class LatestFrameBox {
  private pending: FrameMessage | null = null;
  dropped = 0;

  offer(frame: FrameMessage): void {
    if (this.pending !== null) this.dropped += 1;
    this.pending = frame;
  }

  take(): FrameMessage | null {
    const frame = this.pending;
    this.pending = null;
    return frame;
  }

  get size(): number {
    return this.pending === null ? 0 : 1;
  }
}

// Minimal shape shared by the browser WebSocket and test doubles.
export interface SocketLike {
  onopen: (() => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onerror: ((ev: unknown) => void) | null;
  readyState: number;
  send(data: string): void;
  close(): void;
}

const SOCKET_OPEN = 1;

export interface SocketHandlers {
  onMessage(msg: ServerMessage): void;
  onStatus(status: ConnectionStatus): void;
}

export class FeedbackSocket {
  private ws: SocketLike | null = null;
  private attempt = 0;
  private stopped = false;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly url: string,
    private readonly handlers: SocketHandlers,
    private readonly makeSocket: (url: string) => SocketLike =
      (u) => new WebSocket(u) as unknown as SocketLike,
  ) {}

  connect(): void {
    if (this.stopped) return;
    this.handlers.onStatus("connecting");
    const ws = this.makeSocket(this.url);
    this.ws = ws;
    ws.onopen = () => {
      this.attempt = 0;
      this.handlers.onStatus("open");
    };
    ws.onmessage = (ev) => {
      const text = typeof ev.data === "string" ? ev.data : String(ev.data);
      const msg = parseServerMessage(text);
      if (msg !== null) this.handlers.onMessage(msg);
    };
    ws.onerror = () => {
      // onclose follows; reconnect is scheduled there
    };
    ws.onclose = () => {
      this.ws = null;
      this.handlers.onStatus("closed");
      if (!this.stopped) {
        const delay = backoffDelayMs(this.attempt);
        this.attempt += 1;
        this.timer = setTimeout(() => this.connect(), delay);
      }
    };
  }

  send(msg: ClientMessage): boolean {
    if (this.ws === null || this.ws.readyState !== SOCKET_OPEN) return false;
    this.ws.send(encodeMessage(msg));
    return true;
  }

  close(): void {
    this.stopped = true;
    if (this.timer !== null) clearTimeout(this.timer);
    this.ws?.close();
  }
}
