// F1~F2 vowel-space panel: current position plus a fading trail.
// Phonetician orientation, so close front vowels sit top-left.

import { clearPanel, COLORS, preparePanel } from "./canvas.js";
import type { PanelContext } from "./canvas.js";
import { vowelPoint } from "./scales.js";
import type { LutRanges } from "./protocol.js";
import type { ViewState } from "./viewstate.js";

const FALLBACK_RANGES: LutRanges = {
  f1_lo: 320, f1_hi: 903, f2_lo: 828, f2_hi: 2616,
};

export class VowelSpaceRenderer {
  private panel: PanelContext;

  constructor(canvas: HTMLCanvasElement) {
    this.panel = preparePanel(canvas);
  }

  render(state: ViewState): void {
    clearPanel(this.panel);
    const { ctx, width, height } = this.panel;
    const ranges = state.acked?.lut ?? FALLBACK_RANGES;

    ctx.strokeStyle = COLORS.grid;
    ctx.lineWidth = 1;
    ctx.strokeRect(0.5, 0.5, width - 1, height - 1);
    ctx.fillStyle = COLORS.text;
    ctx.font = "10px monospace";
    ctx.fillText(`F2 ${ranges.f2_hi.toFixed(0)}`, 4, 12);
    ctx.textAlign = "right";
    ctx.fillText(`${ranges.f2_lo.toFixed(0)} Hz`, width - 4, 12);
    ctx.fillText(`F1 ${ranges.f1_lo.toFixed(0)}`, width - 4, 24);
    ctx.fillText(`${ranges.f1_hi.toFixed(0)} Hz`, width - 4, height - 6);
    ctx.textAlign = "left";

    const trail = state.trail;
    trail.forEach((pt, i) => {
      const { x, y } = vowelPoint(pt.f1, pt.f2, ranges, width, height);
      const age = trail.length - 1 - i; // 0 = newest
      const alpha = Math.max(0.08, 1 - age / Math.max(1, state.trailLength));
      ctx.globalAlpha = alpha;
      ctx.fillStyle = COLORS.live;
      ctx.beginPath();
      ctx.arc(x, y, age === 0 ? 5 : 2.5, 0, 2 * Math.PI);
      ctx.fill();
    });
    ctx.globalAlpha = 1;

    if (state.sliderMode) {
      const { x, y } = vowelPoint(state.sliderF1, state.sliderF2, ranges, width, height);
      ctx.strokeStyle = COLORS.point;
      ctx.lineWidth = 1.5;
      ctx.beginPath();
      ctx.arc(x, y, 6, 0, 2 * Math.PI);
      ctx.stroke();
      ctx.beginPath();
      ctx.moveTo(x - 10, y);
      ctx.lineTo(x + 10, y);
      ctx.moveTo(x, y - 10);
      ctx.lineTo(x, y + 10);
      ctx.stroke();
    }
  }
}
