// Live spectrum panel: LPC envelope curve with vertical markers at the
// tracked formants; highlighted formants draw emphasized.

import { clearPanel, centerText, COLORS, preparePanel } from "./canvas.js";
import type { PanelContext } from "./canvas.js";
import type { ViewState } from "./viewstate.js";

const DB_PAD = 6;
const RANGE_SMOOTH = 0.9; // slow autorange so the curve does not jitter

export class SpectrumRenderer {
  private panel: PanelContext;
  private dbLo = -40;
  private dbHi = 40;

  constructor(canvas: HTMLCanvasElement) {
    this.panel = preparePanel(canvas);
  }

  render(state: ViewState): void {
    clearPanel(this.panel);
    const frame = state.frame;
    if (frame === null || state.sliderMode) {
      centerText(this.panel, state.sliderMode ? "slider mode" : "waiting for audio");
      return;
    }
    const { ctx, width, height } = this.panel;
    const sr = state.acked?.sample_rate ?? 44100;
    const nyquist = sr / 2;

    const envelope = frame.envelope_db;
    let lo = Infinity;
    let hi = -Infinity;
    for (const v of envelope) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
    this.dbLo = RANGE_SMOOTH * this.dbLo + (1 - RANGE_SMOOTH) * (lo - DB_PAD);
    this.dbHi = RANGE_SMOOTH * this.dbHi + (1 - RANGE_SMOOTH) * (hi + DB_PAD);
    const yOf = (db: number) =>
      height - ((db - this.dbLo) / (this.dbHi - this.dbLo)) * height;

    ctx.strokeStyle = COLORS.grid;
    ctx.lineWidth = 1;
    ctx.fillStyle = COLORS.text;
    ctx.font = "10px monospace";
    for (let khz = 1; khz * 1000 < nyquist; khz += 1) {
      const x = ((khz * 1000) / nyquist) * width;
      ctx.beginPath();
      ctx.moveTo(x, 0);
      ctx.lineTo(x, height);
      ctx.stroke();
      if (khz % 2 === 0 || nyquist <= 9000) {
        ctx.fillText(`${khz}k`, x + 2, height - 4);
      }
    }

    if (frame.voiced) {
      const highlight = new Set(frame.highlight);
      frame.formants.forEach((peak, i) => {
        const n = i + 1;
        const x = (peak.f / nyquist) * width;
        const emphasized = highlight.has(n);
        ctx.strokeStyle = emphasized ? COLORS.highlight : COLORS.marker;
        ctx.lineWidth = emphasized ? 2.5 : 1;
        ctx.beginPath();
        ctx.moveTo(x, 0);
        ctx.lineTo(x, height);
        ctx.stroke();
        ctx.fillStyle = emphasized ? COLORS.highlight : COLORS.text;
        ctx.font = emphasized ? "bold 11px monospace" : "11px monospace";
        ctx.fillText(`F${n} ${peak.f.toFixed(0)}`, x + 3, 12 + 12 * i);
      });
    }

    ctx.strokeStyle = frame.voiced ? COLORS.live : COLORS.dimmed;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    envelope.forEach((db, i) => {
      const x = (i / (envelope.length - 1)) * width;
      const y = yOf(db);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();

    ctx.fillStyle = COLORS.text;
    ctx.font = "10px monospace";
    ctx.fillText(`${frame.rms_db.toFixed(1)} dBFS`, 4, height - 4);
  }
}
