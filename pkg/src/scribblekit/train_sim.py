"""Training-time scribble and previous-mask simulators.

Three stroke generators (curved, skeleton-following, boundary-following)
plus a naive linked-points one, a geometric stroke-count law, boundary
strategies that keep strokes off the region border, and flawed
previous-mask synthesis. Everything is a deterministic function of
(inputs, rng state), so batches built from per-sample derived seeds are
identical whether generated serially or in parallel.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .eval_sim import build_graph, longest_path, remove_cycles, tree_path
from .masks import (
    as_mask,
    bounding_box,
    connected_components,
    dilate,
    distance_transform,
    erode,
    translate,
)
from .skeleton import medial_axis
from .strokes import Polarity, ScribbleMaps, Stroke, rasterize_stroke

logger = logging.getLogger(__name__)

BoundaryStrategy = Literal["allow_error", "clean_boundary", "protect_boundary"]


@dataclass
class PerturbParams:
    """Magnitude ranges for previous-mask degradation.

    Each operation is applied independently with ``op_probability``; with
    all magnitudes zero the perturbation is the identity. Erase rectangles
    are placed inside the mask's bounding box, each covering at most
    ``erase_area_fraction`` of it.
    """

    dilate_radius: tuple[int, int] = (1, 5)
    erode_radius: tuple[int, int] = (1, 5)
    max_shift: int = 10
    erase_count: tuple[int, int] = (1, 3)
    erase_area_fraction: float = 0.15
    op_probability: float = 0.5


@dataclass
class TrainSimConfig:
    """Stroke-simulation defaults.

    Stroke count n is drawn with P(n) proportional to decay^(n-1) up to
    max_strokes; thickness is uniform over thickness_range inclusive. The
    remainder of the generator proportions goes to the curved generator.
    pred_perturb_ratio weighs segmenter predictions against perturbed
    ground truth when synthesizing previous masks; cold_start_prob is the
    chance of an empty previous mask (first-interaction sample).
    """

    max_strokes: int = 16
    decay: float = 0.8
    thickness_range: tuple[int, int] = (3, 7)
    proportion_axial: float = 0.2
    proportion_boundary: float = 0.2
    proportion_linked: float = 0.0
    boundary_strategy: BoundaryStrategy = "protect_boundary"
    pred_perturb_ratio: tuple[float, float] = (1.0, 0.4)
    cold_start_prob: float = 0.0
    perturb: PerturbParams = field(default_factory=PerturbParams)
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.max_strokes < 1:
            raise ValueError("max_strokes must be >= 1")
        if not 0 < self.decay <= 1:
            raise ValueError("decay must be in (0, 1]")
        lo, hi = self.thickness_range
        if lo < 1 or hi < lo:
            raise ValueError(f"bad thickness_range: {self.thickness_range}")
        extra = self.proportion_axial + self.proportion_boundary + self.proportion_linked
        if min(self.proportion_axial, self.proportion_boundary, self.proportion_linked) < 0 or extra > 1:
            raise ValueError("generator proportions must be >= 0 and sum to <= 1")
        if min(self.pred_perturb_ratio) < 0 or sum(self.pred_perturb_ratio) <= 0:
            raise ValueError(f"bad pred_perturb_ratio: {self.pred_perturb_ratio}")
        if not 0 <= self.cold_start_prob <= 1:
            raise ValueError("cold_start_prob must be in [0, 1]")


@dataclass
class TrainingSample:
    """One simulated interaction state: scribbles, flawed mask, and truth."""

    image: np.ndarray | None
    scribbles: ScribbleMaps
    previous_mask: np.ndarray
    ground_truth: np.ndarray
    strokes: list[Stroke]


def sample_stroke_count(cfg: TrainSimConfig, rng: np.random.Generator) -> int:
    """Number of strokes for one sample: P(n) proportional to decay^(n-1)."""
    weights = cfg.decay ** np.arange(cfg.max_strokes)
    return int(rng.choice(np.arange(1, cfg.max_strokes + 1), p=weights / weights.sum()))


def sample_thickness(cfg: TrainSimConfig, rng: np.random.Generator) -> int:
    lo, hi = cfg.thickness_range
    return int(rng.integers(lo, hi + 1))


def _region_pixels(region: np.ndarray) -> np.ndarray:
    region = as_mask(region)
    pixels = np.argwhere(region)
    if len(pixels) == 0:
        raise ValueError("scribble generation requires a nonempty region")
    return pixels


def _ordered_picks(pixels: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` random region pixels as (x, y), ordered along a random direction."""
    picks = pixels[rng.integers(0, len(pixels), size=count)].astype(np.float64)
    angle = rng.uniform(0.0, 2.0 * np.pi)
    order = np.argsort(picks @ np.array([np.sin(angle), np.cos(angle)]), kind="stable")
    return picks[order][:, ::-1]


def gen_bezier_scribble(
    region: np.ndarray, thickness: int, rng: np.random.Generator, polarity: Polarity = "pos"
) -> Stroke:
    """Curved stroke: a cubic curve through 4 random points of the region."""
    pixels = _region_pixels(region)
    if len(pixels) == 1:
        return Stroke(points=pixels[:, ::-1].astype(np.float64), thickness=thickness, polarity=polarity)
    control = _ordered_picks(pixels, 4, rng)
    length = float(np.hypot(*np.diff(control, axis=0).T).sum())
    t = np.linspace(0.0, 1.0, max(16, int(np.ceil(2 * length))))[:, None]
    u = 1.0 - t
    curve = (
        u**3 * control[0]
        + 3 * u**2 * t * control[1]
        + 3 * u * t**2 * control[2]
        + t**3 * control[3]
    )
    return Stroke(points=curve, thickness=thickness, polarity=polarity)


def _path_stroke(
    coords: np.ndarray, thickness: int, polarity: Polarity
) -> Stroke:
    return Stroke(points=np.asarray(coords)[:, ::-1].astype(np.float64), thickness=thickness, polarity=polarity)


def gen_axial_scribble(
    region: np.ndarray, thickness: int, rng: np.random.Generator, polarity: Polarity = "pos"
) -> Stroke:
    """Stroke along a random sub-path of the region's skeleton."""
    _region_pixels(region)
    skeleton = medial_axis(region)
    if int(skeleton.sum()) <= 2:
        return _path_stroke(np.argwhere(skeleton), thickness, polarity)
    forest = remove_cycles(build_graph(skeleton))
    start = int(rng.integers(len(forest.nodes)))
    members = np.flatnonzero(forest.component_ids == forest.component_ids[start])
    end = int(members[rng.integers(len(members))])
    path = tree_path(forest, start, end)
    return _path_stroke(forest.nodes[path], thickness, polarity)


def gen_boundary_scribble(
    region: np.ndarray,
    thickness: int,
    rng: np.random.Generator,
    polarity: Polarity = "pos",
    offset: int | None = None,
) -> Stroke:
    """Stroke following the region contour at a fixed inward offset.

    Regions too thin to hold the offset band fall back to a skeleton
    stroke.
    """
    _region_pixels(region)
    if offset is None:
        offset = int(np.ceil(thickness / 2)) + 1
    dist = distance_transform(region)
    band = (dist >= offset) & (dist <= offset + 1)
    if not band.any():
        return gen_axial_scribble(region, thickness, rng, polarity)
    ring = longest_path(remove_cycles(build_graph(band)))
    keep = min(len(ring), max(2, int(round(len(ring) * rng.uniform(0.4, 0.9)))))
    start = int(rng.integers(0, len(ring) - keep + 1))
    return _path_stroke(ring[start : start + keep], thickness, polarity)


def gen_linked_scribble(
    region: np.ndarray, thickness: int, rng: np.random.Generator, polarity: Polarity = "pos"
) -> Stroke:
    """Naive stroke: a few random region points joined by straight segments."""
    pixels = _region_pixels(region)
    if len(pixels) == 1:
        return Stroke(points=pixels[:, ::-1].astype(np.float64), thickness=thickness, polarity=polarity)
    count = int(rng.integers(2, 6))
    return Stroke(points=_ordered_picks(pixels, count, rng), thickness=thickness, polarity=polarity)


def protect_erosion_radius(thickness: int) -> int:
    return int(np.ceil(thickness / 2))


def apply_boundary_strategy(
    stroke_raster: np.ndarray,
    target: np.ndarray,
    strategy: BoundaryStrategy,
    thickness: int,
) -> np.ndarray:
    """Clip a stroke raster according to the boundary strategy.

    allow_error passes the raster through; clean_boundary clips to the
    target; protect_boundary clips to the eroded target, degrading to
    clean_boundary when the erosion is empty.
    """
    stroke_raster = as_mask(stroke_raster)
    target = as_mask(target)
    if stroke_raster.shape != target.shape:
        raise ValueError(f"mask dimensions differ: {stroke_raster.shape} vs {target.shape}")
    if strategy == "allow_error":
        return stroke_raster.copy()
    if strategy == "clean_boundary":
        return stroke_raster & target
    if strategy == "protect_boundary":
        eroded = erode(target, protect_erosion_radius(thickness))
        return stroke_raster & (eroded if eroded.any() else target)
    raise ValueError(f"unknown boundary strategy: {strategy!r}")


def _permitted_region(target: np.ndarray, strategy: BoundaryStrategy, thickness: int) -> np.ndarray:
    if strategy == "protect_boundary":
        eroded = erode(target, protect_erosion_radius(thickness))
        if eroded.any():
            return eroded
    return target


def perturb_mask(
    gt: np.ndarray, rng: np.random.Generator, params: PerturbParams | None = None
) -> np.ndarray:
    """Degrade a mask by random dilation, erosion, translation, and erasing."""
    gt = as_mask(gt)
    if not gt.any():
        raise ValueError("perturb_mask requires a nonempty mask")
    params = params or PerturbParams()
    box = bounding_box(gt)
    out = gt.copy()
    if rng.random() < params.op_probability:
        out = dilate(out, int(rng.integers(params.dilate_radius[0], params.dilate_radius[1] + 1)))
    if rng.random() < params.op_probability:
        out = erode(out, int(rng.integers(params.erode_radius[0], params.erode_radius[1] + 1)))
    if rng.random() < params.op_probability:
        dx, dy = (int(v) for v in rng.integers(-params.max_shift, params.max_shift + 1, size=2))
        out = translate(out, dx, dy)
    if rng.random() < params.op_probability and params.erase_count[1] > 0:
        r0, c0, r1, c1 = box
        bh, bw = r1 - r0, c1 - c0
        budget = max(1, int(params.erase_area_fraction * bh * bw))
        for _ in range(int(rng.integers(params.erase_count[0], params.erase_count[1] + 1))):
            w = int(rng.integers(1, min(bw, budget) + 1))
            h = int(rng.integers(1, min(bh, budget // w) + 1))
            top = int(rng.integers(r0, r1 - h + 1))
            left = int(rng.integers(c0, c1 - w + 1))
            out[top : top + h, left : left + w] = False
    return out


def simulate_previous_mask(
    gt: np.ndarray,
    cfg: TrainSimConfig,
    rng: np.random.Generator,
    segmenter=None,
    image: np.ndarray | None = None,
) -> np.ndarray:
    """A flawed mask standing in for the segmenter's last prediction.

    Chooses between a real prediction on a simulated first interaction and
    a perturbed ground truth with odds pred_perturb_ratio; an empty
    (cold-start) mask is returned with probability cold_start_prob.
    """
    gt = as_mask(gt)
    if rng.random() < cfg.cold_start_prob:
        return np.zeros_like(gt)
    num, den = cfg.pred_perturb_ratio
    if rng.random() < num / (num + den):
        if segmenter is None:
            logger.info("previous-mask prediction branch without a segmenter; perturbing instead")
        else:
            from .segmenters import SegmentationRequest

            maps, _ = _compose_scribbles(gt, np.zeros_like(gt), cfg, rng)
            if image is None:
                image = np.zeros(gt.shape + (3,), dtype=np.uint8)
            request = SegmentationRequest(
                image=image, scribbles=maps, previous_mask=np.zeros_like(gt)
            )
            predicted = as_mask(segmenter.predict(request))
            if predicted.shape != gt.shape:
                raise ValueError(f"segmenter returned shape {predicted.shape}, expected {gt.shape}")
            return predicted
    return perturb_mask(gt, rng, cfg.perturb)


_GENERATORS = {
    "bezier": gen_bezier_scribble,
    "axial": gen_axial_scribble,
    "boundary": gen_boundary_scribble,
    "linked": gen_linked_scribble,
}


def _pick_generator(cfg: TrainSimConfig, rng: np.random.Generator) -> str:
    r = float(rng.random())
    threshold = 1.0 - cfg.proportion_axial - cfg.proportion_boundary - cfg.proportion_linked
    for name, width in (
        ("bezier", threshold),
        ("axial", cfg.proportion_axial),
        ("boundary", cfg.proportion_boundary),
    ):
        if r < width:
            return name
        r -= width
    return "linked"


def _split_strokes(total: int, area_pos: int, area_neg: int) -> tuple[int, int]:
    """Split a stroke budget between polarities proportionally to area."""
    if area_pos == 0:
        return 0, total
    if area_neg == 0:
        return total, 0
    n_pos = int(round(total * area_pos / (area_pos + area_neg)))
    n_pos = min(max(n_pos, 0), total)
    if area_pos >= area_neg:
        n_pos = max(n_pos, 1)
    elif n_pos == total:
        n_pos = total - 1
    return n_pos, total - n_pos


def _compose_scribbles(
    pos_target: np.ndarray,
    neg_target: np.ndarray,
    cfg: TrainSimConfig,
    rng: np.random.Generator,
) -> tuple[ScribbleMaps, list[Stroke]]:
    shape = pos_target.shape
    n_pos, n_neg = _split_strokes(
        sample_stroke_count(cfg, rng), int(pos_target.sum()), int(neg_target.sum())
    )
    maps = ScribbleMaps.empty(shape)
    strokes: list[Stroke] = []
    plan: list[tuple[Polarity, np.ndarray]] = [("pos", pos_target)] * n_pos + [
        ("neg", neg_target)
    ] * n_neg
    for polarity, target in plan:
        regions = connected_components(target)
        label = int(
            rng.choice(np.arange(1, regions.count + 1), p=regions.sizes[1:] / regions.sizes.sum())
        )
        component = regions.region_mask(label)
        thickness = sample_thickness(cfg, rng)
        generator = _GENERATORS[_pick_generator(cfg, rng)]
        permitted = _permitted_region(component, cfg.boundary_strategy, thickness)
        stroke = generator(permitted, thickness, rng, polarity)
        raster = apply_boundary_strategy(
            rasterize_stroke(stroke, shape), component, cfg.boundary_strategy, thickness
        )
        if raster.any():
            maps = maps.with_stroke(raster, polarity)
            strokes.append(stroke)
    return maps, strokes


def compose_training_sample(
    image: np.ndarray | None,
    gt: np.ndarray,
    cfg: TrainSimConfig,
    rng: np.random.Generator,
    segmenter=None,
) -> TrainingSample:
    """Full simulated training input: previous mask plus corrective scribbles.

    With an empty previous mask, positives target the ground truth and
    negatives its complement; otherwise positives target false-negative
    regions and negatives false-positive regions.
    """
    gt = as_mask(gt)
    if not gt.any():
        raise ValueError("compose_training_sample requires a nonempty ground truth")
    if image is not None and image.shape[:2] != gt.shape:
        raise ValueError(f"image shape {image.shape[:2]} does not match mask shape {gt.shape}")
    previous = simulate_previous_mask(gt, cfg, rng, segmenter=segmenter, image=image)
    for _ in range(5):
        if previous.any() and not (previous ^ gt).any():
            previous = simulate_previous_mask(gt, cfg, rng, segmenter=segmenter, image=image)
        else:
            break
    else:
        previous = np.zeros_like(gt)

    if previous.any():
        pos_target = gt & ~previous
        neg_target = previous & ~gt
    else:
        pos_target = gt
        neg_target = ~gt
    maps, strokes = _compose_scribbles(pos_target, neg_target, cfg, rng)
    return TrainingSample(
        image=image,
        scribbles=maps,
        previous_mask=previous,
        ground_truth=gt,
        strokes=strokes,
    )
