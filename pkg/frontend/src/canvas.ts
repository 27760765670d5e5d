// Shared canvas plumbing for the panel renderers.

export interface PanelContext {
  ctx: CanvasRenderingContext2D;
  width: number;
  height: number;
}

export const COLORS = {
  background: "#14181d",
  grid: "#262c34",
  text: "#8a94a0",
  live: "#4fd1c5",
  warning: "#f6ad55",
  dimmed: "#5a646e",
  marker: "#7f8ea0",
  highlight: "#ffd166",
  point: "#e8edf2",
} as const;

/** Size the backing store for the device pixel ratio; draw in CSS pixels. */
export function preparePanel(canvas: HTMLCanvasElement): PanelContext {
  const dpr = window.devicePixelRatio || 1;
  const rect = canvas.getBoundingClientRect();
  canvas.width = Math.max(1, Math.round(rect.width * dpr));
  canvas.height = Math.max(1, Math.round(rect.height * dpr));
  const ctx = canvas.getContext("2d");
  if (ctx === null) throw new Error("canvas 2d context unavailable");
  ctx.scale(dpr, dpr);
  return { ctx, width: rect.width, height: rect.height };
}

export function clearPanel(panel: PanelContext): void {
  panel.ctx.fillStyle = COLORS.background;
  panel.ctx.fillRect(0, 0, panel.width, panel.height);
}

export function centerText(panel: PanelContext, text: string): void {
  const { ctx, width, height } = panel;
  ctx.fillStyle = COLORS.text;
  ctx.font = "12px monospace";
  ctx.textAlign = "center";
  ctx.fillText(text, width / 2, height / 2);
  ctx.textAlign = "left";
}
