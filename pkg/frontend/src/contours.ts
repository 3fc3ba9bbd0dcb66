/**
 * Contour overlays: f0 and amplitude polylines computed from the
 * server-returned synthesis parameters (never recomputed client-side),
 * with dashed gridlines at note boundaries.
 */

import type { NoteEntry, ParamsSummary } from "./model.js";

export type Point = [number, number];

/** Map a per-frame series onto pixel coordinates, y inverted (0 = top). */
export function computePolyline(values: number[], width: number,
                                height: number, lo?: number,
                                hi?: number): Point[] {
  const n = values.length;
  if (n === 0) return [];
  const min = lo ?? Math.min(...values);
  const max = hi ?? Math.max(...values);
  const span = max - min || 1;
  return values.map((v, i): Point => [
    (n === 1 ? 0.5 : i / (n - 1)) * width,
    height - ((v - min) / span) * height,
  ]);
}

/** x positions of note onset/offset boundaries on the frame grid. */
export function noteBoundaries(notes: NoteEntry[], totalFrames: number,
                               width: number): number[] {
  if (totalFrames <= 0) return [];
  const xs = new Set<number>();
  for (const note of notes) {
    xs.add((note.onset / totalFrames) * width);
    xs.add((note.offset / totalFrames) * width);
  }
  return [...xs].sort((a, b) => a - b);
}

/** Amplitude in dB for display (floored like the extractor's log scale). */
export function amplitudeDb(amplitude: number[]): number[] {
  return amplitude.map((a) => 20 * Math.log10(Math.max(a, 1e-7)));
}

export function drawContours(canvas: HTMLCanvasElement,
                             params: ParamsSummary, notes: NoteEntry[],
                             totalFrames: number): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  const half = height / 2;

  ctx.strokeStyle = "#bbb";
  ctx.setLineDash([4, 4]);
  for (const x of noteBoundaries(notes, totalFrames, width)) {
    ctx.beginPath();
    ctx.moveTo(x, 0);
    ctx.lineTo(x, height);
    ctx.stroke();
  }
  ctx.setLineDash([]);
  ctx.strokeStyle = "#888";
  ctx.beginPath();
  ctx.moveTo(0, half);
  ctx.lineTo(width, half);
  ctx.stroke();

  const drawSeries = (points: Point[], color: string, yOffset: number) => {
    ctx.strokeStyle = color;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    points.forEach(([x, y], i) => {
      if (i === 0) ctx.moveTo(x, y + yOffset);
      else ctx.lineTo(x, y + yOffset);
    });
    ctx.stroke();
  };

  // top half: f0 (Hz); bottom half: amplitude (dB)
  drawSeries(computePolyline(params.f0, width, half - 4), "#2166ac", 2);
  drawSeries(computePolyline(amplitudeDb(params.amplitude), width, half - 4),
             "#b2182b", half + 2);
}
