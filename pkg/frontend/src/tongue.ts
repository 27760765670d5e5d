// Predicted tongue contour panel. Tongue tip on the left. The mm-to-pixel
// mapping is frozen on the first contour of the session so articulator
// motion reads as motion, not as rescaling.

import { clearPanel, centerText, COLORS, preparePanel } from "./canvas.js";
import type { PanelContext } from "./canvas.js";
import { mmViewport } from "./scales.js";
import type { MmViewport } from "./scales.js";
import { contourPaint } from "./viewstate.js";
import type { ViewState } from "./viewstate.js";

export class TongueRenderer {
  private panel: PanelContext;
  private viewport: MmViewport | null = null;

  constructor(canvas: HTMLCanvasElement) {
    this.panel = preparePanel(canvas);
  }

  render(state: ViewState): void {
    clearPanel(this.panel);
    const paint = contourPaint(state);
    if (paint === null) {
      centerText(this.panel, "no contour yet");
      return;
    }
    const { ctx, width, height } = this.panel;
    if (this.viewport === null) {
      this.viewport = mmViewport(paint.contour, width, height);
    }
    const vp = this.viewport;

    const stroke =
      paint.style === "warning" ? COLORS.warning :
      paint.style === "dimmed" ? COLORS.dimmed : COLORS.live;
    ctx.strokeStyle = stroke;
    ctx.lineWidth = paint.style === "dimmed" ? 1.5 : 2.5;
    ctx.globalAlpha = paint.style === "dimmed" ? 0.45 : 1;
    if (paint.style === "warning") ctx.setLineDash([6, 4]);
    ctx.beginPath();
    const { x, y } = paint.contour;
    for (let i = 0; i < x.length; i += 1) {
      const px = vp.x(x[i]!);
      const py = vp.y(y[i]!);
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    }
    ctx.stroke();
    ctx.setLineDash([]);

    // tip dot at the mouth end (last point, drawn leftmost)
    const tip = x.length - 1;
    ctx.fillStyle = stroke;
    ctx.beginPath();
    ctx.arc(vp.x(x[tip]!), vp.y(y[tip]!), 3, 0, 2 * Math.PI);
    ctx.fill();
    ctx.globalAlpha = 1;

    // 10 mm scale bar
    ctx.strokeStyle = COLORS.text;
    ctx.lineWidth = 1;
    ctx.beginPath();
    ctx.moveTo(width - 14 - 10 * vp.pxPerMm, height - 10);
    ctx.lineTo(width - 14, height - 10);
    ctx.stroke();
    ctx.fillStyle = COLORS.text;
    ctx.font = "10px monospace";
    ctx.fillText("10 mm", width - 14 - 10 * vp.pxPerMm, height - 14);
    ctx.fillText("tongue tip on the left", 6, height - 6);
    if (paint.style === "warning") {
      ctx.fillStyle = COLORS.warning;
      ctx.fillText("extrapolated", 6, 12);
    }
  }
}
