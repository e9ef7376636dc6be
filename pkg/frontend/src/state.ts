/** Annotation session state: queued gestures, layer cache, error handling. */

import type { Polarity, SessionClient, SessionState, StrokePayload } from "./api.js";
import { ServiceError } from "./api.js";
import type { LayerFactory, LayerSource, Polyline, Scene } from "./canvas.js";
import { MASK_ALPHA, MASK_TINT, NEGATIVE_COLOR, POSITIVE_COLOR, SCRIBBLE_ALPHA, polarityColor } from "./canvas.js";

export const MIN_THICKNESS = 1;
export const MAX_THICKNESS = 15;

export function clampThickness(value: number): number {
  return Math.min(MAX_THICKNESS, Math.max(MIN_THICKNESS, Math.round(value)));
}

export function formatIoU(value: number | null): string {
  return value === null ? "—" : value.toFixed(3);
}

export interface Preview {
  points: [number, number][];
  polarity: Polarity;
  thickness: number;
}

/** Client-side session mirror; every repaint derives from the last fetched state. */
export class Annotator {
  sessionId: string | null = null;
  width = 0;
  height = 0;
  iou: number | null = null;
  interactionCount = 0;
  undoDepth = 0;
  hasGt = false;
  banner: string | null = null;
  pendingRetry: StrokePayload | null = null;
  preview: Preview | null = null;
  busy = false;

  private layers: LayerSource[] = [];
  private queue: StrokePayload[] = [];
  private draining = false;

  constructor(
    private readonly client: SessionClient,
    private readonly layerFactory: LayerFactory,
    private readonly onChange: () => void = () => {},
  ) {}

  async start(imageBase64: string, gtBase64?: string, segmenter = "geodesic"): Promise<void> {
    this.sessionId = await this.client.createSession(imageBase64, gtBase64, segmenter);
    this.banner = null;
    this.pendingRetry = null;
    this.preview = null;
    await this.refresh();
  }

  /** Attach to an existing session, e.g. after a page reload. */
  async attach(sessionId: string): Promise<void> {
    this.sessionId = sessionId;
    await this.refresh();
  }

  /** Refetch the session and rebuild every layer from it. */
  async refresh(): Promise<void> {
    const state = await this.client.getState(this.requireSession());
    await this.applyState(state);
    this.onChange();
  }

  private async applyState(state: SessionState): Promise<void> {
    this.width = state.width;
    this.height = state.height;
    this.iou = state.iou ?? null;
    this.interactionCount = state.interaction_count;
    this.undoDepth = state.undo_depth;
    this.hasGt = state.has_gt;
    this.layers = await Promise.all([
      this.layerFactory(state.image, null, 1),
      this.layerFactory(state.mask, MASK_TINT, MASK_ALPHA),
      this.layerFactory(state.positive, POSITIVE_COLOR, SCRIBBLE_ALPHA),
      this.layerFactory(state.negative, NEGATIVE_COLOR, SCRIBBLE_ALPHA),
    ]);
  }

  /** Queue one finished gesture; strokes are sent strictly one at a time. */
  submitStroke(stroke: StrokePayload): Promise<void> {
    this.queue.push(stroke);
    return this.drain();
  }

  /** Resend the stroke retained after a failed round. */
  retry(): Promise<void> {
    if (!this.pendingRetry) return Promise.resolve();
    const stroke = this.pendingRetry;
    this.pendingRetry = null;
    this.queue.unshift(stroke);
    return this.drain();
  }

  private async drain(): Promise<void> {
    if (this.draining) return;
    this.draining = true;
    this.busy = true;
    this.onChange();
    try {
      while (this.queue.length > 0) {
        const stroke = this.queue.shift()!;
        try {
          await this.runRound(stroke);
        } catch (err) {
          // Keep the stroke for retry and stop; later gestures stay queued.
          this.banner = err instanceof ServiceError ? err.message : String(err);
          this.pendingRetry = stroke;
          break;
        }
      }
    } finally {
      this.draining = false;
      this.busy = false;
      this.onChange();
    }
  }

  private async runRound(stroke: StrokePayload): Promise<void> {
    const id = this.requireSession();
    await this.client.addStroke(id, stroke);
    await this.client.predict(id);
    const state = await this.client.getState(id);
    await this.applyState(state);
    this.banner = null;
    this.preview = null;
    this.onChange();
  }

  async undoLast(): Promise<void> {
    try {
      await this.client.undo(this.requireSession());
    } catch (err) {
      this.banner = err instanceof ServiceError ? err.message : String(err);
      this.onChange();
      return;
    }
    this.preview = null;
    await this.refresh();
  }

  /** Fetch the simulator's next corrective stroke and show it as a preview. */
  async suggestStroke(): Promise<void> {
    const result = await this.client.autoScribble(this.requireSession());
    if (result.converged) {
      this.preview = null;
      this.banner = "prediction already matches the reference";
    } else {
      this.preview = {
        points: result.stroke.points,
        polarity: result.polarity,
        thickness: result.stroke.thickness,
      };
      this.banner = null;
    }
    this.onChange();
  }

  /** Everything the renderer needs; gesture is the in-progress pointer trace. */
  scene(gesture: Polyline | null = null): Scene {
    const preview: Polyline | null = this.preview
      ? {
          points: this.preview.points,
          color: polarityColor(this.preview.polarity),
          lineWidth: this.preview.thickness,
          dashed: true,
        }
      : null;
    return {
      width: this.width,
      height: this.height,
      layers: [...this.layers],
      gesture,
      preview,
    };
  }

  private requireSession(): string {
    if (this.sessionId === null) throw new Error("no active session");
    return this.sessionId;
  }
}
