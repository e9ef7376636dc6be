/** DOM wiring: controls, pointer events, and the repaint loop. */

import type { Polarity } from "./api.js";
import { SessionClient } from "./api.js";
import type { Context2D } from "./canvas.js";
import { browserLayerFactory, polarityColor, renderScene } from "./canvas.js";
import { Annotator, clampThickness, formatIoU } from "./state.js";
import { GestureRecorder } from "./stroke.js";

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

function fileAsBase64(file: File): Promise<string> {
  return new Promise((resolve, reject) => {
    const reader = new FileReader();
    reader.onerror = () => reject(new Error(`could not read ${file.name}`));
    reader.onload = () => {
      const url = reader.result as string;
      resolve(url.slice(url.indexOf(",") + 1));
    };
    reader.readAsDataURL(file);
  });
}

function main(): void {
  const canvas = byId<HTMLCanvasElement>("board");
  const ctx = canvas.getContext("2d") as unknown as Context2D | null;
  if (!ctx) throw new Error("canvas 2d context unavailable");

  const recorder = new GestureRecorder("pos", 3);
  const client = new SessionClient("");
  const iouReadout = byId<HTMLSpanElement>("iou");
  const roundsReadout = byId<HTMLSpanElement>("rounds");
  const banner = byId<HTMLDivElement>("banner");
  const retryButton = byId<HTMLButtonElement>("retry");
  const undoButton = byId<HTMLButtonElement>("undo");
  const suggestButton = byId<HTMLButtonElement>("suggest");

  const annotator = new Annotator(client, browserLayerFactory(document), repaint);

  function repaint(): void {
    if (canvas.width !== annotator.width || canvas.height !== annotator.height) {
      canvas.width = annotator.width;
      canvas.height = annotator.height;
    }
    const live = recorder.livePoints;
    renderScene(
      ctx!,
      annotator.scene(
        live.length > 0
          ? {
              points: live,
              color: polarityColor(recorder.polarity),
              lineWidth: recorder.thickness,
              dashed: false,
            }
          : null,
      ),
    );
    iouReadout.textContent = formatIoU(annotator.iou);
    roundsReadout.textContent = String(annotator.interactionCount);
    banner.textContent = annotator.banner ?? "";
    banner.hidden = annotator.banner === null;
    retryButton.hidden = annotator.pendingRetry === null;
    undoButton.disabled = annotator.busy || annotator.undoDepth === 0;
    suggestButton.disabled = annotator.busy || !annotator.hasGt;
  }

  function canvasPoint(event: PointerEvent): [number, number] {
    const rect = canvas.getBoundingClientRect();
    const x = ((event.clientX - rect.left) * canvas.width) / rect.width;
    const y = ((event.clientY - rect.top) * canvas.height) / rect.height;
    return [x, y];
  }

  canvas.addEventListener("pointerdown", (event) => {
    if (annotator.sessionId === null) return;
    canvas.setPointerCapture(event.pointerId);
    recorder.begin(...canvasPoint(event));
    repaint();
  });
  canvas.addEventListener("pointermove", (event) => {
    if (!recorder.active) return;
    recorder.extend(...canvasPoint(event));
    repaint();
  });
  canvas.addEventListener("pointerup", () => {
    const stroke = recorder.end();
    repaint();
    if (stroke) void annotator.submitStroke(stroke);
  });
  canvas.addEventListener("pointercancel", () => {
    recorder.cancel();
    repaint();
  });

  for (const polarity of ["pos", "neg"] as Polarity[]) {
    byId<HTMLButtonElement>(`tool-${polarity}`).addEventListener("click", () => {
      recorder.polarity = polarity;
      byId<HTMLButtonElement>("tool-pos").classList.toggle("active", polarity === "pos");
      byId<HTMLButtonElement>("tool-neg").classList.toggle("active", polarity === "neg");
    });
  }

  const thickness = byId<HTMLInputElement>("thickness");
  thickness.addEventListener("input", () => {
    recorder.thickness = clampThickness(Number(thickness.value));
    thickness.value = String(recorder.thickness);
  });

  undoButton.addEventListener("click", () => void annotator.undoLast());
  suggestButton.addEventListener("click", () => void annotator.suggestStroke());
  retryButton.addEventListener("click", () => void annotator.retry());

  byId<HTMLButtonElement>("start").addEventListener("click", () => {
    void (async () => {
      const imageFile = byId<HTMLInputElement>("image-file").files?.[0];
      if (!imageFile) {
        banner.textContent = "choose an image first";
        banner.hidden = false;
        return;
      }
      const gtFile = byId<HTMLInputElement>("gt-file").files?.[0];
      const segmenter = byId<HTMLSelectElement>("segmenter").value;
      try {
        await annotator.start(
          await fileAsBase64(imageFile),
          gtFile ? await fileAsBase64(gtFile) : undefined,
          segmenter,
        );
        window.location.hash = annotator.sessionId ?? "";
      } catch (err) {
        banner.textContent = String(err);
        banner.hidden = false;
      }
    })();
  });

  // Reload with #session-id in the URL reattaches to the same session.
  const existing = window.location.hash.slice(1);
  if (existing) {
    void annotator.attach(existing).catch(() => {
      window.location.hash = "";
    });
  }
}

main();
