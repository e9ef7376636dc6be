/** Typed client for the annotation service HTTP API. */

export type Polarity = "pos" | "neg";

export interface StrokePayload {
  points: [number, number][];
  thickness: number;
  polarity: Polarity;
}

export interface SessionState {
  id: string;
  width: number;
  height: number;
  segmenter: string;
  interaction_count: number;
  undo_depth: number;
  has_gt: boolean;
  image: string;
  positive: string;
  negative: string;
  mask: string;
  iou?: number;
}

export interface PredictResult {
  mask: string;
  iou?: number;
  warning?: string;
}

export type AutoScribbleResult =
  | { converged: true }
  | { converged: false; stroke: StrokePayload; polarity: Polarity };

export class ServiceError extends Error {
  constructor(
    message: string,
    readonly status: number | null,
  ) {
    super(message);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url, init);
  } catch (err) {
    throw new ServiceError(`service unreachable: ${String(err)}`, null);
  }
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // keep the status text
    }
    throw new ServiceError(detail, response.status);
  }
  return (await response.json()) as T;
}

function post<T>(url: string, body?: unknown): Promise<T> {
  return request<T>(url, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body ?? {}),
  });
}

export class SessionClient {
  constructor(readonly baseUrl = "") {}

  async createSession(image: string, gt?: string, segmenter = "geodesic"): Promise<string> {
    const body: Record<string, string> = { image, segmenter };
    if (gt !== undefined) body.gt = gt;
    const result = await post<{ id: string }>(`${this.baseUrl}/sessions`, body);
    return result.id;
  }

  getState(id: string): Promise<SessionState> {
    return request<SessionState>(`${this.baseUrl}/sessions/${id}`);
  }

  addStroke(id: string, stroke: StrokePayload): Promise<{ undo_depth: number }> {
    return post(`${this.baseUrl}/sessions/${id}/strokes`, stroke);
  }

  predict(id: string, zoom = false): Promise<PredictResult> {
    return post(`${this.baseUrl}/sessions/${id}/predict`, { zoom });
  }

  undo(id: string): Promise<{ undo_depth: number }> {
    return post(`${this.baseUrl}/sessions/${id}/undo`);
  }

  autoScribble(id: string): Promise<AutoScribbleResult> {
    return post(`${this.baseUrl}/sessions/${id}/auto_scribble`);
  }
}
