// Exploration sliders: turn slider motion into invert requests, rate
// limited with a trailing send so the final position is always requested.

import type { ClientMessage } from "./protocol.js";

export const MIN_REQUEST_INTERVAL_MS = 34; // ceil(1000/30): at most 30/s

export interface SliderPort {
  send(msg: ClientMessage): boolean;
  now(): number;
  schedule(fn: () => void, delayMs: number): unknown;
  cancel(handle: unknown): void;
}

export class SliderController {
  lastIssuedId = 0;

  private nextId = 1;
  private lastSentAt = -Infinity;
  private timer: unknown = null;
  private active = false;
  private f1 = 0;
  private f2 = 0;

  constructor(
    private readonly port: SliderPort,
    private readonly onIssued: (id: number) => void,
  ) {}

  /** Enter slider mode at a position; requests start immediately. */
  start(f1: number, f2: number): void {
    this.active = true;
    this.f1 = f1;
    this.f2 = f2;
    this.sendNow();
  }

  move(f1: number, f2: number): void {
    if (!this.active) return;
    this.f1 = f1;
    this.f2 = f2;
    const wait = this.lastSentAt + MIN_REQUEST_INTERVAL_MS - this.port.now();
    if (wait <= 0) {
      this.sendNow();
    } else if (this.timer === null) {
      this.timer = this.port.schedule(() => {
        this.timer = null;
        if (this.active) this.sendNow();
      }, wait);
    }
  }

  /** Leave slider mode; pending sends are cancelled, not flushed. */
  stop(): void {
    this.active = false;
    if (this.timer !== null) {
      this.port.cancel(this.timer);
      this.timer = null;
    }
  }

  private sendNow(): void {
    const id = this.nextId;
    const sent = this.port.send({ type: "invert", id, f1: this.f1, f2: this.f2 });
    if (!sent) return; // socket down; the id is reused on the next move
    this.nextId += 1;
    this.lastIssuedId = id;
    this.lastSentAt = this.port.now();
    this.onIssued(id);
  }
}
