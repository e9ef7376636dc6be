/** Pointer-gesture capture: one finished stroke per down→move→up cycle. */

import type { Polarity, StrokePayload } from "./api.js";

export const MIN_SPACING = 2;

/** Drop points closer than `spacing` px to the last kept one.
 *
 * The first point is always kept, so consecutive kept points are always at
 * least `spacing` apart; the stroke may stop just short of the lift point.
 */
export function downsample(points: [number, number][], spacing = MIN_SPACING): [number, number][] {
  if (points.length === 0) return [];
  const first = points[0]!;
  const kept: [number, number][] = [first];
  let [lastX, lastY] = first;
  for (const [x, y] of points.slice(1)) {
    if (Math.hypot(x - lastX, y - lastY) >= spacing) {
      kept.push([x, y]);
      [lastX, lastY] = [x, y];
    }
  }
  return kept;
}

/** Accumulates one pointer trace and emits a single stroke on release. */
export class GestureRecorder {
  private trace: [number, number][] | null = null;

  constructor(
    public polarity: Polarity = "pos",
    public thickness = 3,
  ) {}

  get active(): boolean {
    return this.trace !== null;
  }

  /** Current raw trace, for live feedback while drawing. */
  get livePoints(): [number, number][] {
    return this.trace ? [...this.trace] : [];
  }

  begin(x: number, y: number): void {
    this.trace = [[x, y]];
  }

  extend(x: number, y: number): void {
    if (this.trace) this.trace.push([x, y]);
  }

  /** Finish the gesture; returns exactly one stroke, or null outside a gesture. */
  end(): StrokePayload | null {
    if (!this.trace) return null;
    const points = downsample(this.trace);
    this.trace = null;
    if (points.length === 0) return null;
    return { points, thickness: this.thickness, polarity: this.polarity };
  }

  cancel(): void {
    this.trace = null;
  }
}
