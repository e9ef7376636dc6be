/** Layered canvas rendering: image, mask overlay, scribbles, stroke previews. */

import type { Polarity } from "./api.js";

export const POSITIVE_COLOR = "#22c55e";
export const NEGATIVE_COLOR = "#3b82f6";
export const MASK_TINT = "#ef4444";
export const MASK_ALPHA = 0.45;
export const SCRIBBLE_ALPHA = 0.9;

export function polarityColor(polarity: Polarity): string {
  return polarity === "pos" ? POSITIVE_COLOR : NEGATIVE_COLOR;
}

/** The subset of CanvasRenderingContext2D the renderer touches. */
export interface Context2D {
  globalAlpha: number;
  strokeStyle: string;
  fillStyle: string;
  lineWidth: number;
  lineCap: string;
  lineJoin: string;
  clearRect(x: number, y: number, w: number, h: number): void;
  drawImage(source: unknown, x: number, y: number, w: number, h: number): void;
  setLineDash(segments: number[]): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  stroke(): void;
  fill(): void;
  save(): void;
  restore(): void;
}

/** A drawable raster layer: an opaque bitmap plus its compositing alpha. */
export interface LayerSource {
  key: string;
  bitmap: unknown;
  alpha: number;
}

/** Turns a base64 PNG into a drawable bitmap, optionally tinted a flat color. */
export type LayerFactory = (pngBase64: string, tint: string | null, alpha: number) => Promise<LayerSource>;

export interface Polyline {
  points: [number, number][];
  color: string;
  lineWidth: number;
  dashed: boolean;
}

export interface Scene {
  width: number;
  height: number;
  layers: LayerSource[];
  gesture: Polyline | null;
  preview: Polyline | null;
}

function drawPolyline(ctx: Context2D, line: Polyline): void {
  if (line.points.length === 0) return;
  ctx.save();
  ctx.globalAlpha = 1;
  ctx.strokeStyle = line.color;
  ctx.fillStyle = line.color;
  ctx.lineWidth = line.lineWidth;
  ctx.lineCap = "round";
  ctx.lineJoin = "round";
  ctx.setLineDash(line.dashed ? [6, 4] : []);
  const first = line.points[0]!;
  if (line.points.length === 1) {
    ctx.beginPath();
    ctx.arc(first[0], first[1], Math.max(line.lineWidth / 2, 0.5), 0, 2 * Math.PI);
    ctx.fill();
  } else {
    ctx.beginPath();
    ctx.moveTo(first[0], first[1]);
    for (const [x, y] of line.points.slice(1)) ctx.lineTo(x, y);
    ctx.stroke();
  }
  ctx.restore();
}

/** Repaint the whole scene bottom-up; deterministic for a given scene. */
export function renderScene(ctx: Context2D, scene: Scene): void {
  ctx.clearRect(0, 0, scene.width, scene.height);
  for (const layer of scene.layers) {
    ctx.save();
    ctx.globalAlpha = layer.alpha;
    ctx.drawImage(layer.bitmap, 0, 0, scene.width, scene.height);
    ctx.restore();
  }
  if (scene.gesture) drawPolyline(ctx, scene.gesture);
  if (scene.preview) drawPolyline(ctx, scene.preview);
}

/** Browser layer factory: decodes PNGs via <img> and tints through an offscreen canvas. */
export function browserLayerFactory(doc: Document): LayerFactory {
  return async (pngBase64, tint, alpha) => {
    const img = doc.createElement("img");
    img.src = `data:image/png;base64,${pngBase64}`;
    await img.decode();
    if (tint === null) {
      return { key: pngBase64, bitmap: img, alpha };
    }
    // White-on-black mask PNG -> flat color with the mask as coverage.
    const off = doc.createElement("canvas");
    off.width = img.naturalWidth;
    off.height = img.naturalHeight;
    const ctx = off.getContext("2d");
    if (!ctx) throw new Error("canvas 2d context unavailable");
    ctx.drawImage(img, 0, 0);
    const pixels = ctx.getImageData(0, 0, off.width, off.height);
    const rgb = [1, 3, 5].map((i) => parseInt(tint.slice(i, i + 2), 16));
    const data = pixels.data;
    for (let i = 0; i < data.length; i += 4) {
      data[i + 3] = data[i]!; // coverage from the gray value
      data[i] = rgb[0]!;
      data[i + 1] = rgb[1]!;
      data[i + 2] = rgb[2]!;
    }
    ctx.putImageData(pixels, 0, 0);
    return { key: `${pngBase64}|${tint}`, bitmap: off, alpha };
  };
}
