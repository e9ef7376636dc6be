"""HTTP session service for interactive annotation.

One session holds an image, accumulated scribble maps, the latest
predicted mask, and an undo stack. Requests within a session are
serialized by a per-session lock; sessions expire after an idle timeout.
Masks travel as base64 PNG inside JSON.
"""
from __future__ import annotations

import base64
import threading
import time
import uuid
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .eval_sim import AutoScribbleConfig, Converged, simulate_interaction
from .harness import EvalConfig, paste_back, zoom_in_crop
from .images import image_from_png_bytes, image_png_bytes
from .masks import as_mask, iou, mask_from_png_bytes, mask_png_bytes
from .segmenters import SegmentationRequest, segmenter_from_spec
from .strokes import ScribbleMaps, Stroke, rasterize_stroke


class CreateSessionBody(BaseModel):
    image: str
    gt: str | None = None
    segmenter: str = "geodesic"


class StrokeBody(BaseModel):
    points: list[list[float]]
    thickness: int = 3
    polarity: str


class PredictBody(BaseModel):
    zoom: bool = False


@dataclass
class _SessionState:
    image: np.ndarray
    gt: np.ndarray | None
    segmenter_name: str
    segmenter: object
    scribbles: ScribbleMaps
    prev_mask: np.ndarray
    history: list[tuple[ScribbleMaps, np.ndarray]] = field(default_factory=list)
    interaction_count: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)
    last_access: float = field(default_factory=time.monotonic)


def _b64_encode(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def _decode_mask(b64: str) -> np.ndarray:
    return mask_from_png_bytes(base64.b64decode(b64))


def create_app(idle_timeout: float = 1800.0, static_dir: str | None = None) -> FastAPI:
    """Build the annotation service; optionally serve a static UI at /."""
    app = FastAPI(title="scribble annotation service")
    sessions: dict[str, _SessionState] = {}
    registry_lock = threading.Lock()

    def get_session(session_id: str) -> _SessionState:
        with registry_lock:
            now = time.monotonic()
            expired = [k for k, s in sessions.items() if now - s.last_access > idle_timeout]
            for k in expired:
                del sessions[k]
            session = sessions.get(session_id)
            if session is None:
                raise HTTPException(status_code=404, detail="unknown session")
            session.last_access = now
            return session

    @app.post("/sessions")
    def create_session(body: CreateSessionBody) -> dict:
        try:
            image = image_from_png_bytes(base64.b64decode(body.image))
        except Exception as exc:  # noqa: BLE001 - bad upload is a client error
            raise HTTPException(status_code=400, detail=f"undecodable image: {exc}") from exc
        gt = None
        if body.gt is not None:
            gt = _decode_mask(body.gt)
            if gt.shape != image.shape[:2]:
                raise HTTPException(status_code=400, detail="gt dimensions differ from image")
        try:
            segmenter = segmenter_from_spec(body.segmenter, gt=gt)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        shape = image.shape[:2]
        session_id = uuid.uuid4().hex
        with registry_lock:
            sessions[session_id] = _SessionState(
                image=image,
                gt=gt,
                segmenter_name=body.segmenter,
                segmenter=segmenter,
                scribbles=ScribbleMaps.empty(shape),
                prev_mask=np.zeros(shape, dtype=bool),
            )
        return {"id": session_id}

    @app.post("/sessions/{session_id}/strokes")
    def add_stroke(session_id: str, body: StrokeBody) -> dict:
        session = get_session(session_id)
        try:
            stroke = Stroke(
                points=np.asarray(body.points, dtype=np.float64),
                thickness=body.thickness,
                polarity=body.polarity,
            )
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        with session.lock:
            raster = rasterize_stroke(stroke, session.image.shape[:2])
            session.history.append((session.scribbles, session.prev_mask))
            session.scribbles = session.scribbles.with_stroke(raster, stroke.polarity)
        return {"status": "ok", "undo_depth": len(session.history)}

    @app.post("/sessions/{session_id}/predict")
    def predict(session_id: str, body: PredictBody | None = None) -> dict:
        session = get_session(session_id)
        zoom = bool(body.zoom) if body is not None else False
        with session.lock:
            if not session.scribbles.union().any() and not session.prev_mask.any():
                empty = np.zeros(session.image.shape[:2], dtype=bool)
                return {"mask": _b64_encode(mask_png_bytes(empty)), "warning": "no input"}
            try:
                if zoom and session.prev_mask.any():
                    cfg = EvalConfig(zoom_enabled=True)
                    request, window = zoom_in_crop(
                        session.image, session.prev_mask, session.scribbles, cfg
                    )
                    pred = as_mask(session.segmenter.predict(request))
                    mask = paste_back(pred, window, session.prev_mask)
                else:
                    request = SegmentationRequest(
                        image=session.image,
                        scribbles=session.scribbles,
                        previous_mask=session.prev_mask,
                    )
                    mask = as_mask(session.segmenter.predict(request))
                    if mask.shape != session.image.shape[:2]:
                        raise ValueError(f"segmenter returned shape {mask.shape}")
            except HTTPException:
                raise
            except Exception as exc:  # noqa: BLE001 - surface segmenter faults to the client
                raise HTTPException(status_code=502, detail=f"segmenter failed: {exc}") from exc
            session.prev_mask = mask
            session.interaction_count += 1
            payload = {"mask": _b64_encode(mask_png_bytes(mask))}
            if session.gt is not None:
                payload["iou"] = iou(mask, session.gt)
        return payload

    @app.post("/sessions/{session_id}/undo")
    def undo(session_id: str) -> dict:
        session = get_session(session_id)
        with session.lock:
            if not session.history:
                raise HTTPException(status_code=409, detail="nothing to undo")
            session.scribbles, session.prev_mask = session.history.pop()
        return {"status": "ok", "undo_depth": len(session.history)}

    @app.post("/sessions/{session_id}/auto_scribble")
    def auto_scribble(session_id: str) -> dict:
        session = get_session(session_id)
        if session.gt is None:
            raise HTTPException(status_code=400, detail="session has no ground truth")
        with session.lock:
            result = simulate_interaction(session.gt, session.prev_mask, AutoScribbleConfig())
        if isinstance(result, Converged):
            return {"converged": True}
        return {"converged": False, "stroke": result.stroke.to_payload(), "polarity": result.polarity}

    @app.get("/sessions/{session_id}")
    def get_state(session_id: str) -> dict:
        session = get_session(session_id)
        with session.lock:
            payload = {
                "id": session_id,
                "width": int(session.image.shape[1]),
                "height": int(session.image.shape[0]),
                "segmenter": session.segmenter_name,
                "interaction_count": session.interaction_count,
                "undo_depth": len(session.history),
                "has_gt": session.gt is not None,
                "image": _b64_encode(image_png_bytes(session.image)),
                "positive": _b64_encode(mask_png_bytes(session.scribbles.positive)),
                "negative": _b64_encode(mask_png_bytes(session.scribbles.negative)),
                "mask": _b64_encode(mask_png_bytes(session.prev_mask)),
            }
            if session.gt is not None:
                payload["iou"] = iou(session.prev_mask, session.gt)
        return payload

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app
