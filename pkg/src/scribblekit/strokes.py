"""Stroke geometry and rasterization.

A stroke is a polyline in (x, y) pixel coordinates with a thickness and a
polarity. Curved strokes are represented by densely sampled curve points,
so every stroke rasterizes the same way: interpolate along the polyline
and stamp a round brush at each sample.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import ndimage

from .masks import as_mask, disk_footprint

Polarity = Literal["pos", "neg"]


@dataclass
class Stroke:
    """One annotation stroke: (x, y) polyline, brush thickness, polarity."""

    points: np.ndarray
    thickness: int
    polarity: Polarity

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) == 0:
            raise ValueError("stroke points must be a nonempty (n, 2) array")
        self.points = pts
        if self.thickness < 1:
            raise ValueError("thickness must be >= 1")
        if self.polarity not in ("pos", "neg"):
            raise ValueError(f"unknown polarity: {self.polarity!r}")

    def to_payload(self) -> dict:
        return {
            "points": [[float(x), float(y)] for x, y in self.points],
            "thickness": int(self.thickness),
            "polarity": self.polarity,
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "Stroke":
        return cls(
            points=np.asarray(payload["points"], dtype=np.float64),
            thickness=int(payload["thickness"]),
            polarity=payload["polarity"],
        )


@dataclass
class ScribbleMaps:
    """Accumulated positive and negative scribble rasters for one session."""

    positive: np.ndarray
    negative: np.ndarray

    def __post_init__(self) -> None:
        self.positive = as_mask(self.positive)
        self.negative = as_mask(self.negative)
        if self.positive.shape != self.negative.shape:
            raise ValueError("scribble maps must share dimensions")
        if (self.positive & self.negative).any():
            raise ValueError("positive and negative scribbles overlap")

    @classmethod
    def empty(cls, shape: tuple[int, int]) -> "ScribbleMaps":
        return cls(np.zeros(shape, dtype=bool), np.zeros(shape, dtype=bool))

    def with_stroke(self, raster: np.ndarray, polarity: Polarity) -> "ScribbleMaps":
        """New maps with ``raster`` stamped in; at overlaps the latest stroke wins."""
        raster = as_mask(raster)
        if polarity == "pos":
            return ScribbleMaps(self.positive | raster, self.negative & ~raster)
        if polarity == "neg":
            return ScribbleMaps(self.positive & ~raster, self.negative | raster)
        raise ValueError(f"unknown polarity: {polarity!r}")

    def union(self) -> np.ndarray:
        return self.positive | self.negative


def densify_polyline(points: np.ndarray, spacing: float = 0.5) -> np.ndarray:
    """Resample a polyline so consecutive points are at most ``spacing`` apart."""
    points = np.asarray(points, dtype=np.float64)
    if len(points) == 1:
        return points.copy()
    out = [points[0]]
    for a, b in zip(points[:-1], points[1:]):
        dist = float(np.hypot(*(b - a)))
        steps = max(int(np.ceil(dist / spacing)), 1)
        ts = np.arange(1, steps + 1, dtype=np.float64) / steps
        out.extend(a + ts[:, None] * (b - a))
    return np.asarray(out)


def cubic_bezier(control: np.ndarray, samples: int) -> np.ndarray:
    """Sample a cubic Bezier curve given 4 control points."""
    p0, p1, p2, p3 = np.asarray(control, dtype=np.float64)
    t = np.linspace(0.0, 1.0, samples)[:, None]
    u = 1.0 - t
    return u**3 * p0 + 3 * u**2 * t * p1 + 3 * u * t**2 * p2 + t**3 * p3


def catmull_rom(control: np.ndarray, samples_per_span: int = 32) -> np.ndarray:
    """Interpolating spline through the control points.

    Each span between consecutive control points is converted to the
    equivalent cubic Bezier; endpoints are clamped by duplication.
    """
    ctrl = np.asarray(control, dtype=np.float64)
    if len(ctrl) == 1:
        return ctrl.copy()
    if len(ctrl) == 2:
        return densify_polyline(ctrl, spacing=1.0)
    padded = np.concatenate([ctrl[:1], ctrl, ctrl[-1:]])
    pieces = []
    for i in range(len(ctrl) - 1):
        p0, p1, p2, p3 = padded[i : i + 4]
        bez = np.array([p1, p1 + (p2 - p0) / 6.0, p2 - (p3 - p1) / 6.0, p2])
        seg = cubic_bezier(bez, samples_per_span + 1)
        pieces.append(seg if i == 0 else seg[1:])
    return np.concatenate(pieces)


def rasterize_polyline(
    points: np.ndarray, thickness: int, shape: tuple[int, int]
) -> np.ndarray:
    """Paint a polyline with a round brush of diameter ``thickness``.

    Brush centers falling outside the image still contribute the in-image
    part of their footprint.
    """
    h, w = shape
    radius = thickness / 2.0
    pad = int(np.ceil(radius)) + 1
    canvas = np.zeros((h + 2 * pad, w + 2 * pad), dtype=bool)
    dense = densify_polyline(np.asarray(points, dtype=np.float64))
    cols = np.rint(dense[:, 0]).astype(np.intp) + pad
    rows = np.rint(dense[:, 1]).astype(np.intp) + pad
    keep = (rows >= 0) & (rows < h + 2 * pad) & (cols >= 0) & (cols < w + 2 * pad)
    canvas[rows[keep], cols[keep]] = True
    if radius >= 1.0:
        canvas = ndimage.binary_dilation(canvas, structure=disk_footprint(radius))
    return canvas[pad : pad + h, pad : pad + w]


def rasterize_stroke(stroke: Stroke, shape: tuple[int, int]) -> np.ndarray:
    """Boolean mask of the pixels covered by ``stroke`` on a ``shape`` canvas."""
    return rasterize_polyline(stroke.points, stroke.thickness, shape)
