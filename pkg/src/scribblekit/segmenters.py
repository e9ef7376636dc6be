"""Pluggable segmenters and the request contract they share.

A segmenter is any object with ``predict(request) -> mask`` that returns a
mask of the request's dimensions and is deterministic for identical
requests. Shipped implementations: a ground-truth oracle (harness
self-tests), an always-empty baseline, a geodesic color-distance
segmenter, and adapters for HTTP and subprocess segmenters.
"""
from __future__ import annotations

import base64
import shlex
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .images import as_image, image_png_bytes, save_image
from .masks import (
    as_mask,
    load_mask,
    mask_from_png_bytes,
    mask_png_bytes,
    resize_mask,
    save_mask,
)
from .rng import rng_for
from .strokes import ScribbleMaps
from .train_sim import PerturbParams, perturb_mask


@dataclass(frozen=True)
class CropWindow:
    """Full-resolution box (exclusive bounds) a request was cropped from."""

    row0: int
    col0: int
    row1: int
    col1: int

    @property
    def shape(self) -> tuple[int, int]:
        return self.row1 - self.row0, self.col1 - self.col0


@dataclass
class SegmentationRequest:
    """One prediction input: image, scribble maps, and the previous mask.

    ``crop`` is set when the harness sends a cropped, resized view so
    ground-truth-aware segmenters can reproduce their target in the same
    frame; ordinary segmenters ignore it.
    """

    image: np.ndarray | None
    scribbles: ScribbleMaps
    previous_mask: np.ndarray
    crop: CropWindow | None = None

    def __post_init__(self) -> None:
        self.previous_mask = as_mask(self.previous_mask)
        if self.previous_mask.shape != self.scribbles.positive.shape:
            raise ValueError("previous mask and scribble maps must share dimensions")
        if self.image is not None:
            self.image = as_image(self.image)
            if self.image.shape[:2] != self.previous_mask.shape:
                raise ValueError("image and masks must share dimensions")

    @property
    def shape(self) -> tuple[int, int]:
        return self.previous_mask.shape


class OracleSegmenter:
    """Returns the ground truth it was built with, optionally degraded.

    With noise, perturbation magnitudes scale with ``noise_level`` and the
    outcome is a deterministic function of the request contents.
    """

    def __init__(self, gt: np.ndarray, noise_level: float = 0.0, seed: int = 0) -> None:
        self.gt = as_mask(gt).copy()
        if not 0 <= noise_level <= 1:
            raise ValueError("noise_level must be in [0, 1]")
        self.noise_level = noise_level
        self.seed = seed

    def predict(self, request: SegmentationRequest) -> np.ndarray:
        gt = self.gt
        if request.crop is not None:
            w = request.crop
            gt = gt[w.row0 : w.row1, w.col0 : w.col1]
        if gt.shape != request.shape:
            gt = resize_mask(gt, request.shape)
        if self.noise_level == 0 or not gt.any():
            return gt.copy()
        magnitude = max(1, int(round(5 * self.noise_level)))
        params = PerturbParams(
            dilate_radius=(1, magnitude),
            erode_radius=(1, magnitude),
            max_shift=int(round(10 * self.noise_level)),
        )
        rng = rng_for(
            self.seed,
            int(request.previous_mask.sum()),
            int(request.scribbles.positive.sum()),
            int(request.scribbles.negative.sum()),
        )
        return perturb_mask(gt, rng, params)


def oracle_predict(
    request: SegmentationRequest, gt: np.ndarray, noise_level: float = 0.0, seed: int = 0
) -> np.ndarray:
    return OracleSegmenter(gt, noise_level=noise_level, seed=seed).predict(request)


class EmptySegmenter:
    """Predicts an empty mask regardless of input (cap-convention tests)."""

    def predict(self, request: SegmentationRequest) -> np.ndarray:
        return np.zeros(request.shape, dtype=bool)


def _grid_graph(image: np.ndarray, base_cost: float, lam: float) -> coo_matrix:
    """8-connected pixel graph; crossing a color edge costs extra."""
    h, w = image.shape[:2]
    ids = np.arange(h * w).reshape(h, w)
    rgb = image.astype(np.float64)
    rows, cols, weights = [], [], []
    for dr, dc, step in ((0, 1, 1.0), (1, 0, 1.0), (1, 1, np.sqrt(2.0)), (1, -1, np.sqrt(2.0))):
        src_r = slice(0, h - dr)
        dst_r = slice(dr, h)
        src_c = slice(max(0, -dc), min(w, w - dc))
        dst_c = slice(max(0, dc), min(w, w + dc))
        diff = rgb[src_r, src_c] - rgb[dst_r, dst_c]
        cost = step * (base_cost + lam * np.sqrt((diff**2).sum(axis=2)) / 255.0)
        rows.append(ids[src_r, src_c].ravel())
        cols.append(ids[dst_r, dst_c].ravel())
        weights.append(cost.ravel())
    return coo_matrix(
        (np.concatenate(weights), (np.concatenate(rows), np.concatenate(cols))),
        shape=(h * w, h * w),
    )


def _border_mask(shape: tuple[int, int]) -> np.ndarray:
    border = np.zeros(shape, dtype=bool)
    border[0, :] = border[-1, :] = True
    border[:, 0] = border[:, -1] = True
    return border


class GeodesicSegmenter:
    """Labels each pixel by its geodesically nearest scribble.

    Distance accumulates step length times (base_cost + lam * color step /
    255) along 8-connected paths, so uniform regions are nearly free to
    cross and color edges are expensive. Without negative scribbles, image
    border pixels outside the previous mask act as negative seeds; without
    positive scribbles the previous mask minus the negatives acts as the
    positive seeds. The previous mask also discounts distances on its own
    side by ``prior_weight`` of the largest finite distance.
    """

    def __init__(self, lam: float = 10.0, base_cost: float = 0.01, prior_weight: float = 0.15):
        self.lam = lam
        self.base_cost = base_cost
        self.prior_weight = prior_weight

    def predict(self, request: SegmentationRequest) -> np.ndarray:
        if request.image is None:
            raise ValueError("geodesic segmentation requires an image")
        pos_scribble = request.scribbles.positive
        neg_scribble = request.scribbles.negative
        prev = request.previous_mask
        if not pos_scribble.any() and not neg_scribble.any():
            return prev.copy()
        pos_seeds = pos_scribble if pos_scribble.any() else prev & ~neg_scribble
        if not pos_seeds.any():
            return np.zeros(request.shape, dtype=bool)
        neg_seeds = neg_scribble if neg_scribble.any() else _border_mask(request.shape) & ~prev

        graph = _grid_graph(request.image, self.base_cost, self.lam).tocsr()
        d_pos = self._distances(graph, pos_seeds)
        d_neg = self._distances(graph, neg_seeds)
        if prev.any() and self.prior_weight > 0:
            finite = np.concatenate([d_pos[np.isfinite(d_pos)], d_neg[np.isfinite(d_neg)]])
            offset = self.prior_weight * (float(finite.max()) if len(finite) else 0.0)
            d_pos = d_pos - offset * prev
            d_neg = d_neg - offset * ~prev
        out = (d_pos < d_neg) | ((d_pos == d_neg) & prev)
        out |= pos_scribble
        out &= ~neg_scribble
        return out

    @staticmethod
    def _distances(graph, seeds: np.ndarray) -> np.ndarray:
        indices = np.flatnonzero(seeds.ravel())
        if len(indices) == 0:
            return np.full(seeds.shape, np.inf)
        dist = dijkstra(graph, directed=False, indices=indices, min_only=True)
        return dist.reshape(seeds.shape)


class HttpSegmenter:
    """Adapter for a segmenter served over HTTP.

    Sends JSON with base64-PNG rasters and expects ``{"mask": <base64
    png>}`` back.
    """

    def __init__(self, url: str, timeout: float = 30.0) -> None:
        self.url = url
        self.timeout = timeout

    def predict(self, request: SegmentationRequest) -> np.ndarray:
        import requests

        payload = {
            "image": _b64(image_png_bytes(request.image)) if request.image is not None else None,
            "positive": _b64(mask_png_bytes(request.scribbles.positive)),
            "negative": _b64(mask_png_bytes(request.scribbles.negative)),
            "previous": _b64(mask_png_bytes(request.previous_mask)),
        }
        resp = requests.post(self.url, json=payload, timeout=self.timeout)
        resp.raise_for_status()
        mask = mask_from_png_bytes(base64.b64decode(resp.json()["mask"]))
        return _checked_shape(mask, request.shape)


class SubprocessSegmenter:
    """Adapter for a segmenter run as a subprocess per request.

    The request is materialized as PNG files plus a JSON descriptor; the
    descriptor path goes to the child's stdin and the child prints the
    path of the predicted mask PNG on stdout.
    """

    def __init__(self, command: str, timeout: float = 60.0) -> None:
        self.argv = shlex.split(command)
        if not self.argv:
            raise ValueError("empty segmenter command")
        self.timeout = timeout

    def predict(self, request: SegmentationRequest) -> np.ndarray:
        import json

        with tempfile.TemporaryDirectory(prefix="segment-") as tmp:
            root = Path(tmp)
            h, w = request.shape
            image = request.image
            if image is None:
                image = np.zeros((h, w, 3), dtype=np.uint8)
            save_image(image, root / "image.png")
            save_mask(request.scribbles.positive, root / "positive.png")
            save_mask(request.scribbles.negative, root / "negative.png")
            save_mask(request.previous_mask, root / "previous.png")
            descriptor = {
                "image": str(root / "image.png"),
                "positive": str(root / "positive.png"),
                "negative": str(root / "negative.png"),
                "previous": str(root / "previous.png"),
                "height": h,
                "width": w,
            }
            desc_path = root / "request.json"
            desc_path.write_text(json.dumps(descriptor))
            proc = subprocess.run(
                self.argv,
                input=f"{desc_path}\n",
                capture_output=True,
                text=True,
                timeout=self.timeout,
            )
            if proc.returncode != 0:
                raise RuntimeError(f"segmenter exited with {proc.returncode}: {proc.stderr.strip()}")
            lines = [line.strip() for line in proc.stdout.splitlines() if line.strip()]
            if not lines:
                raise RuntimeError("segmenter produced no output path")
            return _checked_shape(load_mask(lines[-1]), request.shape)


def _b64(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def _checked_shape(mask: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    if mask.shape != shape:
        raise ValueError(f"segmenter returned shape {mask.shape}, expected {shape}")
    return mask


def segmenter_from_spec(spec: str, gt: np.ndarray | None = None, noise_level: float = 0.0, seed: int = 0):
    """Build a segmenter from a CLI/service name.

    Accepts ``oracle``, ``empty``, ``geodesic``, ``http:<url>``, and
    ``subprocess:<command>``; the oracle needs a ground-truth mask.
    """
    if spec == "oracle":
        if gt is None:
            raise ValueError("the oracle segmenter requires a ground-truth mask")
        return OracleSegmenter(gt, noise_level=noise_level, seed=seed)
    if spec == "empty":
        return EmptySegmenter()
    if spec == "geodesic":
        return GeodesicSegmenter()
    if spec.startswith("http:") or spec.startswith("https:"):
        return HttpSegmenter(spec)
    if spec.startswith("subprocess:"):
        return SubprocessSegmenter(spec.split(":", 1)[1])
    raise ValueError(f"unknown segmenter: {spec!r}")
