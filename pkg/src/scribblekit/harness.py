"""Iterative evaluation: drive a segmenter with deterministic scribbles.

Each round adds the one corrective stroke the simulator proposes, asks the
segmenter for a new mask (optionally on a zoomed crop), measures IoU at
full resolution, and stops when every target IoU is met or the interaction
cap is hit. Failed samples count at the cap in NoI and are tallied as NoF.
"""
from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .eval_sim import AutoScribbleConfig, Converged, simulate_interaction
from .images import resize_image
from .masks import as_mask, bounding_box, iou, resize_mask
from .segmenters import CropWindow, SegmentationRequest
from .strokes import ScribbleMaps


@dataclass
class EvalConfig:
    """Protocol parameters: targets, cap, stroke shape, and zoom behavior."""

    target_ious: tuple[float, ...] = (0.85, 0.9)
    max_interactions: int = 20
    eval_thickness: int = 3
    zoom_ratio: float = 1.4
    model_input_size: int = 384
    zoom_enabled: bool = False
    graph_radius: float = 1.5

    def __post_init__(self) -> None:
        self.target_ious = tuple(float(t) for t in self.target_ious)
        if not self.target_ious or not all(0 < t < 1 for t in self.target_ious):
            raise ValueError("target IoUs must lie strictly between 0 and 1")
        if self.max_interactions < 1:
            raise ValueError("max_interactions must be >= 1")
        if self.zoom_ratio < 1:
            raise ValueError("zoom_ratio must be >= 1")
        if self.model_input_size < 1:
            raise ValueError("model_input_size must be >= 1")


@dataclass
class RoundRecord:
    polarity: str
    iou: float


@dataclass
class InteractionTrace:
    """Per-sample log: IoU per round and rounds needed per target."""

    sample_id: str
    rounds: list[RoundRecord] = field(default_factory=list)
    rounds_to_target: dict[float, int | None] = field(default_factory=dict)
    error: str | None = None
    final_mask: np.ndarray | None = None

    def to_payload(self) -> dict:
        return {
            "id": self.sample_id,
            "rounds": [{"polarity": r.polarity, "iou": r.iou} for r in self.rounds],
            "rounds_to_target": {str(t): n for t, n in sorted(self.rounds_to_target.items())},
            "error": self.error,
        }


@dataclass
class MetricsReport:
    """Aggregated NoI/NoF per target plus the traces behind them."""

    dataset_name: str
    noi: dict[float, float]
    nof: dict[float, int]
    sample_count: int
    config: EvalConfig
    traces: list[InteractionTrace]
    failed_loads: list[dict] = field(default_factory=list)

    def to_payload(self) -> dict:
        return {
            "config": asdict(self.config),
            "datasets": [
                {
                    "name": self.dataset_name,
                    "sample_count": self.sample_count,
                    "noi": {str(t): v for t, v in sorted(self.noi.items())},
                    "nof": {str(t): v for t, v in sorted(self.nof.items())},
                    "failed_loads": self.failed_loads,
                    "samples": [t.to_payload() for t in self.traces],
                }
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_payload(), sort_keys=True, indent=2)

    def write_csv(self, path: str | Path) -> None:
        targets = sorted(self.noi)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["sample_id", "rounds_used", "final_iou"]
                + [f"rounds_to_{t}" for t in targets]
                + ["error"]
            )
            for trace in self.traces:
                final_iou = trace.rounds[-1].iou if trace.rounds else 0.0
                writer.writerow(
                    [trace.sample_id, len(trace.rounds), f"{final_iou:.6f}"]
                    + [trace.rounds_to_target.get(t, "") or "" for t in targets]
                    + [trace.error or ""]
                )


def _expanded_box(
    box: tuple[int, int, int, int], shape: tuple[int, int], ratio: float
) -> CropWindow:
    """Grow a box by ``ratio`` about its center, square it, clamp to the image."""
    r0, c0, r1, c1 = box
    side = int(round(max(r1 - r0, c1 - c0) * ratio))
    h, w = shape
    side_r = min(side, h)
    side_c = min(side, w)
    top = int(round((r0 + r1) / 2 - side_r / 2))
    left = int(round((c0 + c1) / 2 - side_c / 2))
    top = max(0, min(top, h - side_r))
    left = max(0, min(left, w - side_c))
    return CropWindow(top, left, top + side_r, left + side_c)


def _cropped_request(
    image: np.ndarray | None,
    scribbles: ScribbleMaps,
    prev_mask: np.ndarray,
    window: CropWindow,
    size: int,
) -> SegmentationRequest:
    rs = slice(window.row0, window.row1)
    cs = slice(window.col0, window.col1)
    out = (size, size)
    return SegmentationRequest(
        image=None if image is None else resize_image(image[rs, cs], out),
        scribbles=ScribbleMaps(
            resize_mask(scribbles.positive[rs, cs], out),
            resize_mask(scribbles.negative[rs, cs], out),
        ),
        previous_mask=resize_mask(prev_mask[rs, cs], out),
        crop=window,
    )


def zoom_in_crop(
    image: np.ndarray | None,
    prev_mask: np.ndarray,
    scribbles: ScribbleMaps,
    cfg: EvalConfig,
) -> tuple[SegmentationRequest, CropWindow]:
    """Model-input-sized request around the previous mask and scribbles."""
    prev_mask = as_mask(prev_mask)
    box = bounding_box(prev_mask | scribbles.union())
    h, w = prev_mask.shape
    window = _expanded_box(box, (h, w), cfg.zoom_ratio) if box else CropWindow(0, 0, h, w)
    return _cropped_request(image, scribbles, prev_mask, window, cfg.model_input_size), window


def paste_back(pred: np.ndarray, window: CropWindow, prev_mask: np.ndarray) -> np.ndarray:
    """Upsample a cropped prediction into its box; outside it the previous mask holds."""
    out = as_mask(prev_mask).copy()
    out[window.row0 : window.row1, window.col0 : window.col1] = resize_mask(
        as_mask(pred), window.shape
    )
    return out


def evaluate_sample(
    image: np.ndarray | None,
    gt: np.ndarray,
    segmenter,
    cfg: EvalConfig,
    sample_id: str = "sample",
) -> InteractionTrace:
    """Run the interaction loop on one sample until targets are met or capped."""
    gt = as_mask(gt)
    if not gt.any():
        raise ValueError("evaluation requires a nonempty ground truth")
    sim_cfg = AutoScribbleConfig(radius=cfg.graph_radius, thickness=cfg.eval_thickness)
    trace = InteractionTrace(sample_id=sample_id)
    trace.rounds_to_target = {t: None for t in cfg.target_ious}
    prev = np.zeros_like(gt)
    maps = ScribbleMaps.empty(gt.shape)
    for round_no in range(1, cfg.max_interactions + 1):
        scribble = simulate_interaction(gt, prev, sim_cfg)
        if isinstance(scribble, Converged):
            break
        maps = maps.with_stroke(scribble.raster, scribble.polarity)
        try:
            if cfg.zoom_enabled:
                if round_no == 1:
                    h, w = gt.shape
                    window = CropWindow(0, 0, h, w)
                    request = _cropped_request(image, maps, prev, window, cfg.model_input_size)
                else:
                    request, window = zoom_in_crop(image, prev, maps, cfg)
                pred = as_mask(segmenter.predict(request))
                if pred.shape != request.shape:
                    raise ValueError(f"prediction shape {pred.shape} != request {request.shape}")
                prev = paste_back(pred, window, prev)
            else:
                request = SegmentationRequest(image=image, scribbles=maps, previous_mask=prev)
                pred = as_mask(segmenter.predict(request))
                if pred.shape != gt.shape:
                    raise ValueError(f"prediction shape {pred.shape} != sample {gt.shape}")
                prev = pred
        except Exception as exc:  # noqa: BLE001 - a broken segmenter fails the sample, not the run
            trace.error = f"{type(exc).__name__}: {exc}"
            break
        score = iou(prev, gt)
        trace.rounds.append(RoundRecord(polarity=scribble.polarity, iou=score))
        for target in cfg.target_ious:
            if trace.rounds_to_target[target] is None and score >= target:
                trace.rounds_to_target[target] = round_no
        if all(n is not None for n in trace.rounds_to_target.values()):
            break
    trace.final_mask = prev
    return trace


def run_evaluation(
    dataset: Iterable,
    segmenter,
    cfg: EvalConfig,
    workers: int | None = None,
    dataset_name: str = "dataset",
) -> MetricsReport:
    """Evaluate every sample and aggregate NoI/NoF.

    ``dataset`` yields objects with sample_id/image/gt attributes; entries
    that are SampleLoadFailure records are excluded from the metrics and
    listed in the report. ``segmenter`` is either a shared predictor or a
    callable building one per sample (the oracle needs the sample's gt).
    """
    samples = []
    failed_loads = []
    for item in dataset:
        if hasattr(item, "gt"):
            samples.append(item)
        else:
            failed_loads.append({"id": item.sample_id, "error": item.message})
    if not samples and not failed_loads:
        raise ValueError("dataset is empty")

    def run_one(sample) -> InteractionTrace:
        predictor = segmenter(sample) if not hasattr(segmenter, "predict") else segmenter
        return evaluate_sample(sample.image, sample.gt, predictor, cfg, sample_id=sample.sample_id)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(run_one, samples))
    else:
        traces = [run_one(s) for s in samples]
    traces.sort(key=lambda t: t.sample_id)

    cap = cfg.max_interactions
    noi: dict[float, float] = {}
    nof: dict[float, int] = {}
    for target in cfg.target_ious:
        rounds = [t.rounds_to_target.get(target) for t in traces]
        noi[target] = float(np.mean([min(r, cap) if r is not None else cap for r in rounds])) if rounds else 0.0
        nof[target] = sum(1 for r in rounds if r is None)
    return MetricsReport(
        dataset_name=dataset_name,
        noi=noi,
        nof=nof,
        sample_count=len(traces),
        config=cfg,
        traces=traces,
        failed_loads=failed_loads,
    )
