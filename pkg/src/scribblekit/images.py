"""RGB image loading, saving, and resizing.

Images are (H, W, 3) uint8 arrays. Grayscale and palette files are
promoted to RGB on load.
"""
from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image


def as_image(arr: np.ndarray) -> np.ndarray:
    """Validate and coerce ``arr`` to an (H, W, 3) uint8 image."""
    img = np.asarray(arr)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"image must be HxWx3, got shape {img.shape}")
    return img.astype(np.uint8, copy=False)


def load_image(path: str | Path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"))


def save_image(image: np.ndarray, path: str | Path) -> None:
    Image.fromarray(as_image(image), mode="RGB").save(path, format="PNG")


def image_png_bytes(image: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(as_image(image), mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def image_from_png_bytes(data: bytes) -> np.ndarray:
    with Image.open(io.BytesIO(data)) as img:
        return np.asarray(img.convert("RGB"))


def resize_image(image: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Bilinear resize to (height, width)."""
    h, w = shape
    pil = Image.fromarray(as_image(image), mode="RGB")
    return np.asarray(pil.resize((w, h), resample=Image.BILINEAR))
