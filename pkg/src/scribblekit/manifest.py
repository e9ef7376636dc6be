"""Dataset manifests: line-delimited JSON listings of image/mask pairs.

Each line is one record: {"id": ..., "image": path, "mask": path,
"category": optional}. Paths may be relative; loaders resolve them against
a caller-supplied root (usually the manifest's directory).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import UnidentifiedImageError

from .images import load_image
from .masks import load_mask
from .rng import rng_for


class ManifestError(Exception):
    """Malformed manifest or entry."""


class MissingFileError(ManifestError):
    """An entry references a file that does not exist."""


class DimensionMismatchError(ManifestError):
    """Image and mask dimensions disagree."""


class ImageDecodeError(ManifestError):
    """A referenced file is not a decodable image."""


@dataclass
class ManifestEntry:
    sample_id: str
    image_path: str
    mask_path: str
    category: str | None = None


@dataclass
class DatasetManifest:
    name: str
    entries: list[ManifestEntry] = field(default_factory=list)


@dataclass
class Sample:
    """A loaded dataset element: RGB image plus ground-truth mask."""

    sample_id: str
    image: np.ndarray
    gt: np.ndarray
    category: str | None = None


@dataclass
class SampleLoadFailure:
    """Record of an entry that could not be loaded."""

    sample_id: str
    message: str


def load_manifest(path: str | Path) -> DatasetManifest:
    path = Path(path)
    entries: list[ManifestEntry] = []
    seen: set[str] = set()
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
        try:
            entry = ManifestEntry(
                sample_id=str(record["id"]),
                image_path=str(record["image"]),
                mask_path=str(record["mask"]),
                category=record.get("category"),
            )
        except KeyError as exc:
            raise ManifestError(f"{path}:{lineno}: missing key {exc}") from exc
        if entry.sample_id in seen:
            raise ManifestError(f"{path}:{lineno}: duplicate sample id {entry.sample_id!r}")
        seen.add(entry.sample_id)
        entries.append(entry)
    return DatasetManifest(name=path.stem, entries=entries)


def save_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    lines = []
    for entry in manifest.entries:
        record = {"id": entry.sample_id, "image": entry.image_path, "mask": entry.mask_path}
        if entry.category is not None:
            record["category"] = entry.category
        lines.append(json.dumps(record, sort_keys=True))
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def _resolve(raw: str, root: Path | None) -> Path:
    path = Path(raw)
    if not path.is_absolute() and root is not None:
        path = root / path
    return path


def load_sample(entry: ManifestEntry, root: str | Path | None = None) -> Sample:
    """Load an entry's rasters, raising a typed error on any defect."""
    root = Path(root) if root is not None else None
    image_path = _resolve(entry.image_path, root)
    mask_path = _resolve(entry.mask_path, root)
    for path in (image_path, mask_path):
        if not path.exists():
            raise MissingFileError(f"{entry.sample_id}: missing file {path}")
    try:
        image = load_image(image_path)
        gt = load_mask(mask_path)
    except (UnidentifiedImageError, OSError) as exc:
        raise ImageDecodeError(f"{entry.sample_id}: {exc}") from exc
    if image.shape[:2] != gt.shape:
        raise DimensionMismatchError(
            f"{entry.sample_id}: image {image.shape[:2]} vs mask {gt.shape}"
        )
    return Sample(sample_id=entry.sample_id, image=image, gt=gt, category=entry.category)


def iter_samples(manifest: DatasetManifest, root: str | Path | None = None):
    """Yield Sample objects, substituting SampleLoadFailure for bad entries."""
    for entry in manifest.entries:
        try:
            yield load_sample(entry, root)
        except ManifestError as exc:
            yield SampleLoadFailure(sample_id=entry.sample_id, message=str(exc))


def make_benchmark(manifest: DatasetManifest, per_category: int, seed: int) -> DatasetManifest:
    """Pick up to ``per_category`` entries per category with a seeded shuffle.

    Categories with fewer entries keep everything. The output ordering is
    (category, sample id), so the same inputs always give the same
    manifest.
    """
    if per_category < 0:
        raise ValueError("per_category must be >= 0")
    groups: dict[str, list[ManifestEntry]] = {}
    for entry in manifest.entries:
        if entry.category is None:
            raise ManifestError(f"entry {entry.sample_id!r} has no category")
        groups.setdefault(entry.category, []).append(entry)
    rng = rng_for(seed)
    chosen: list[ManifestEntry] = []
    for category in sorted(groups):
        pool = sorted(groups[category], key=lambda e: e.sample_id)
        order = rng.permutation(len(pool))
        chosen.extend(pool[i] for i in order[:per_category])
    chosen.sort(key=lambda e: (e.category, e.sample_id))
    return DatasetManifest(name=manifest.name, entries=chosen)
