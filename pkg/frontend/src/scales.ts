// Pure coordinate mapping for the three panels.

import type { ContourData, LutRanges } from "./protocol.js";

export function linearScale(
  d0: number, d1: number, r0: number, r1: number,
): (v: number) => number {
  const span = d1 - d0;
  return (v) => r0 + ((v - d0) / span) * (r1 - r0);
}

export interface MmViewport {
  x(mmX: number): number;
  y(mmY: number): number;
  pxPerMm: number;
}

/**
 * Millimetre-to-pixel mapping for the contour panel, built once from the
 * first contour seen and then held fixed so frame-to-frame motion stays
 * comparable. Equal scale on both axes; model x is mirrored so the tongue
 * tip (largest x) draws on the left; mm y grows upward, pixels downward.
 */
export function mmViewport(
  first: ContourData, width: number, height: number, marginFrac = 0.2,
): MmViewport {
  const xMin = Math.min(...first.x);
  const xMax = Math.max(...first.x);
  const yMin = Math.min(...first.y);
  const yMax = Math.max(...first.y);
  const xPad = (xMax - xMin || 1) * marginFrac;
  const yPad = (yMax - yMin || 1) * marginFrac;
  const spanX = xMax - xMin + 2 * xPad;
  const spanY = yMax - yMin + 2 * yPad;
  const pxPerMm = Math.min(width / spanX, height / spanY);
  const cx = (xMin + xMax) / 2;
  const cy = (yMin + yMax) / 2;
  return {
    x: (mmX) => width / 2 - (mmX - cx) * pxPerMm,
    y: (mmY) => height / 2 - (mmY - cy) * pxPerMm,
    pxPerMm,
  };
}

/**
 * Phonetician-style vowel chart position: F2 decreases rightward, F1
 * decreases upward, so close front vowels land top-left.
 */
export function vowelPoint(
  f1: number, f2: number, ranges: LutRanges, width: number, height: number,
): { x: number; y: number } {
  const x = (width * (ranges.f2_hi - f2)) / (ranges.f2_hi - ranges.f2_lo);
  const y = (height * (f1 - ranges.f1_lo)) / (ranges.f1_hi - ranges.f1_lo);
  return { x, y };
}
