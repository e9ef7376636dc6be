"""Binary mask primitives: IoU, morphology, components, distance transform.

A mask is a 2-D boolean numpy array indexed ``[row, col]``. All functions
are pure: same inputs give bit-identical outputs, so masks can be shared
freely across worker threads.

PNG convention: value 0 = false, 255 = true on save; any value >= 128
reads back as true. Round-trips are bit-exact.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
from PIL import Image
from scipy import ndimage

Connectivity = Literal[4, 8]

_STRUCTURE_4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
_STRUCTURE_8 = np.ones((3, 3), dtype=bool)


def as_mask(arr: np.ndarray) -> np.ndarray:
    """Validate and coerce ``arr`` to a 2-D boolean mask."""
    m = np.asarray(arr)
    if m.ndim != 2:
        raise ValueError(f"mask must be 2-D, got shape {m.shape}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"mask dimensions must be >= 1, got {m.shape}")
    return m.astype(bool, copy=False)


def _check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"mask dimensions differ: {a.shape} vs {b.shape}")


def iou(a: np.ndarray, b: np.ndarray) -> float:
    """Intersection over union; 1.0 when both masks are empty."""
    a = as_mask(a)
    b = as_mask(b)
    _check_same_shape(a, b)
    union = int(np.count_nonzero(a | b))
    if union == 0:
        return 1.0
    inter = int(np.count_nonzero(a & b))
    return inter / union


@dataclass
class LabeledRegions:
    """Connected regions of a mask.

    ``labels`` is an integer raster (0 = background, regions numbered
    1..count). ``sizes[k]`` is the pixel count of region k (``sizes[0]`` is
    unused). ``polarity`` maps labels to ``"fn"``/``"fp"`` when the regions
    were derived from an error mask.
    """

    labels: np.ndarray
    sizes: np.ndarray
    polarity: dict[int, str] = field(default_factory=dict)

    @property
    def count(self) -> int:
        return len(self.sizes) - 1

    def region_mask(self, label: int) -> np.ndarray:
        return self.labels == label


def connected_components(mask: np.ndarray, connectivity: Connectivity = 8) -> LabeledRegions:
    """Label connected regions of true pixels under 4- or 8-connectivity."""
    mask = as_mask(mask)
    structure = _STRUCTURE_4 if connectivity == 4 else _STRUCTURE_8
    labels, count = ndimage.label(mask, structure=structure)
    sizes = np.bincount(labels.ravel(), minlength=count + 1)
    sizes[0] = 0
    return LabeledRegions(labels=labels, sizes=sizes)


def _first_raster_index(labels: np.ndarray, label: int) -> int:
    return int(np.flatnonzero(labels.ravel() == label)[0])


def largest_component(mask: np.ndarray, connectivity: Connectivity = 8) -> np.ndarray:
    """Mask of the largest region; empty input yields an empty mask.

    Equal-size regions tie-break on the smallest (row, col) of their
    raster-first pixel, keeping the result deterministic.
    """
    mask = as_mask(mask)
    regions = connected_components(mask, connectivity)
    if regions.count == 0:
        return np.zeros_like(mask)
    return regions.labels == largest_label(regions)


def largest_label(regions: LabeledRegions) -> int:
    """Label of the biggest region; size ties go to the raster-first region."""
    if regions.count == 0:
        raise ValueError("no regions")
    max_size = int(regions.sizes[1:].max())
    candidates = [k for k in range(1, regions.count + 1) if regions.sizes[k] == max_size]
    return min(candidates, key=lambda k: _first_raster_index(regions.labels, k))


def error_regions(gt: np.ndarray, pred: np.ndarray, connectivity: Connectivity = 8) -> LabeledRegions:
    """Label false-negative and false-positive regions of a prediction.

    FN regions (gt true, pred false) and FP regions (pred true, gt false)
    are labeled separately so every region has a single polarity; labels
    are renumbered contiguously with FN regions first.
    """
    gt = as_mask(gt)
    pred = as_mask(pred)
    _check_same_shape(gt, pred)
    fn = connected_components(gt & ~pred, connectivity)
    fp = connected_components(pred & ~gt, connectivity)
    labels = fn.labels.copy()
    offset = fn.count
    labels[fp.labels > 0] = fp.labels[fp.labels > 0] + offset
    sizes = np.concatenate([fn.sizes, fp.sizes[1:]])
    polarity = {k: "fn" for k in range(1, fn.count + 1)}
    polarity.update({k + offset: "fp" for k in range(1, fp.count + 1)})
    return LabeledRegions(labels=labels, sizes=sizes, polarity=polarity)


def disk_footprint(radius: float) -> np.ndarray:
    """Boolean disk: offsets with Euclidean norm <= radius. Radius 0 is 1x1."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    r = int(np.floor(radius))
    yy, xx = np.mgrid[-r : r + 1, -r : r + 1]
    return (yy * yy + xx * xx) <= radius * radius + 1e-9


def dilate(mask: np.ndarray, radius: float) -> np.ndarray:
    """Minkowski dilation with a disk, clamped to the image bounds."""
    mask = as_mask(mask)
    if radius <= 0:
        return mask.copy()
    return ndimage.binary_dilation(mask, structure=disk_footprint(radius))


def erode(mask: np.ndarray, radius: float) -> np.ndarray:
    """Minkowski erosion with a disk; pixels outside the image count as false."""
    mask = as_mask(mask)
    if radius <= 0:
        return mask.copy()
    return ndimage.binary_erosion(mask, structure=disk_footprint(radius), border_value=0)


def distance_transform(mask: np.ndarray) -> np.ndarray:
    """Exact Euclidean distance to the nearest false pixel (0 on false pixels).

    Pixels outside the image count as false, so a fully-true mask has
    distance 1 along its border.
    """
    mask = as_mask(mask)
    padded = np.pad(mask, 1, constant_values=False)
    dist = ndimage.distance_transform_edt(padded)
    return dist[1:-1, 1:-1]


def translate(mask: np.ndarray, dx: int, dy: int) -> np.ndarray:
    """Shift a mask by (dx cols, dy rows) with zero fill (no wrap-around)."""
    mask = as_mask(mask)
    out = np.zeros_like(mask)
    h, w = mask.shape
    src_r = slice(max(0, -dy), min(h, h - dy))
    src_c = slice(max(0, -dx), min(w, w - dx))
    dst_r = slice(max(0, dy), min(h, h + dy))
    dst_c = slice(max(0, dx), min(w, w + dx))
    if src_r.start < src_r.stop and src_c.start < src_c.stop:
        out[dst_r, dst_c] = mask[src_r, src_c]
    return out


def bounding_box(mask: np.ndarray) -> tuple[int, int, int, int] | None:
    """(row0, col0, row1, col1) with exclusive upper bounds, or None if empty."""
    mask = as_mask(mask)
    rows = np.flatnonzero(mask.any(axis=1))
    if len(rows) == 0:
        return None
    cols = np.flatnonzero(mask.any(axis=0))
    return int(rows[0]), int(cols[0]), int(rows[-1]) + 1, int(cols[-1]) + 1


def resize_mask(mask: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Nearest-neighbor resize using the pixel-center convention.

    Destination pixel (i, j) samples source pixel (floor((i+0.5)·sh/h),
    floor((j+0.5)·sw/w)), so upsampling then downsampling back is the
    identity whenever the source is not larger than the intermediate size.
    """
    mask = as_mask(mask)
    h, w = shape
    if h < 1 or w < 1:
        raise ValueError(f"target shape must be >= 1x1, got {shape}")
    sh, sw = mask.shape
    rows = np.minimum(((np.arange(h) + 0.5) * sh / h).astype(np.intp), sh - 1)
    cols = np.minimum(((np.arange(w) + 0.5) * sw / w).astype(np.intp), sw - 1)
    return mask[np.ix_(rows, cols)]


def save_mask(mask: np.ndarray, path: str | Path) -> None:
    """Write a mask as an 8-bit single-channel PNG (0 / 255)."""
    mask = as_mask(mask)
    Image.fromarray(mask.astype(np.uint8) * 255, mode="L").save(path, format="PNG")


def load_mask(path: str | Path) -> np.ndarray:
    """Read an 8-bit PNG mask; values >= 128 are true."""
    with Image.open(path) as img:
        arr = np.asarray(img.convert("L"))
    return arr >= 128


def mask_png_bytes(mask: np.ndarray) -> bytes:
    """PNG-encode a mask (same convention as save_mask)."""
    mask = as_mask(mask)
    buf = io.BytesIO()
    Image.fromarray(mask.astype(np.uint8) * 255, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def mask_from_png_bytes(data: bytes) -> np.ndarray:
    """Decode a PNG-encoded mask; values >= 128 are true."""
    with Image.open(io.BytesIO(data)) as img:
        arr = np.asarray(img.convert("L"))
    return arr >= 128
