"""Acceptance gate: one test per headline guarantee, at stated tolerances.

Each test is independent and prints one pass/fail line under ``pytest -v``.
"""
from __future__ import annotations

import math
import time

import numpy as np
import pytest
from scipy import stats

from helpers import (
    count_components,
    diameter_oracle,
    graph_component_labels,
    random_blob_mask,
    random_graph,
    random_tree,
    two_region_sample,
)
from scribblekit.eval_sim import Converged, longest_path, remove_cycles, simulate_interaction
from scribblekit.harness import EvalConfig, evaluate_sample, run_evaluation
from scribblekit.manifest import Sample
from scribblekit.masks import erode, iou
from scribblekit.rng import rng_for
from scribblekit.segmenters import (
    EmptySegmenter,
    GeodesicSegmenter,
    OracleSegmenter,
    SegmentationRequest,
)
from scribblekit.skeleton import medial_axis
from scribblekit.strokes import ScribbleMaps, rasterize_stroke
from scribblekit.train_sim import (
    TrainSimConfig,
    apply_boundary_strategy,
    gen_axial_scribble,
    gen_bezier_scribble,
    gen_boundary_scribble,
    protect_erosion_radius,
    sample_stroke_count,
)


def synthetic_dataset(count, seed, size=48):
    rng = rng_for(seed)
    return [
        Sample(
            sample_id=f"sample{i:03d}",
            image=np.zeros((size, size, 3), np.uint8),
            gt=random_blob_mask((size, size), rng, blobs=2),
        )
        for i in range(count)
    ]


def two_region_dataset(count, seed, size=48):
    rng = rng_for(seed)
    samples = []
    for i in range(count):
        image, gt = two_region_sample(rng, size=size)
        samples.append(Sample(sample_id=f"pair{i:03d}", image=image, gt=gt))
    return samples


def test_oracle_closure_reaches_every_target_in_one_round():
    # A perfect segmenter must close the loop immediately on 50 samples,
    # and the whole run must stay under 10 seconds.
    dataset = synthetic_dataset(50, seed=201)
    started = time.perf_counter()
    report = run_evaluation(dataset, lambda s: OracleSegmenter(s.gt), EvalConfig())
    elapsed = time.perf_counter() - started
    assert report.noi == {0.85: 1.0, 0.9: 1.0}
    assert report.nof == {0.85: 0, 0.9: 0}
    assert report.sample_count == 50
    assert elapsed < 10.0


def test_failed_samples_count_at_the_interaction_cap():
    dataset = synthetic_dataset(10, seed=202)
    report = run_evaluation(dataset, EmptySegmenter(), EvalConfig())
    assert report.noi == {0.85: 20.0, 0.9: 20.0}
    assert report.nof == {0.85: 10, 0.9: 10}


def test_longest_path_and_cycle_removal_match_graph_oracles():
    rng = rng_for(203)
    for _ in range(200):
        tree = random_tree(rng, max_nodes=12)
        path = longest_path(tree)
        length, pair = diameter_oracle(len(tree.nodes), tree.edges)
        index = {(int(r), int(c)): i for i, (r, c) in enumerate(tree.nodes)}
        assert (index[tuple(path[0])], index[tuple(path[-1])]) == pair
        got = sum(
            math.hypot(*(path[k + 1] - path[k]).astype(float)) for k in range(len(path) - 1)
        )
        assert got == pytest.approx(length)
    for _ in range(1000):
        graph = random_graph(rng)
        forest = remove_cycles(graph)
        labels = graph_component_labels(len(forest.nodes), forest.edges)
        components = max(labels) + 1 if labels else 0
        assert len(forest.edges) == len(forest.nodes) - components
        assert labels == graph_component_labels(len(graph.nodes), graph.edges)


def test_full_evaluation_reports_are_byte_identical():
    def run_once():
        dataset = two_region_dataset(20, seed=204)
        return run_evaluation(dataset, GeodesicSegmenter(), EvalConfig()).to_json()

    assert run_once() == run_once()


def test_training_strokes_stay_inside_their_permitted_regions():
    rng = rng_for(205)
    generators = (gen_bezier_scribble, gen_axial_scribble, gen_boundary_scribble)
    for _ in range(1000):
        region = random_blob_mask((40, 40), rng, blobs=2)
        thickness = int(rng.integers(3, 8))
        eroded = erode(region, protect_erosion_radius(thickness))
        for generator in generators:
            stroke = generator(region, thickness, rng)
            raster = apply_boundary_strategy(
                rasterize_stroke(stroke, region.shape), region, "clean_boundary", thickness
            )
            assert not (raster & ~region).any()

            permitted = eroded if eroded.any() else region
            stroke = generator(permitted, thickness, rng)
            raster = apply_boundary_strategy(
                rasterize_stroke(stroke, region.shape), region, "protect_boundary", thickness
            )
            if eroded.any():
                assert not (raster & ~eroded).any()
            else:
                assert not (raster & ~region).any()


def test_corrective_scribbles_respect_polarity_containment():
    rng = rng_for(206)
    checked = 0
    for _ in range(500):
        gt = random_blob_mask((32, 32), rng, blobs=2)
        pred = random_blob_mask((32, 32), rng, blobs=2)
        result = simulate_interaction(gt, pred)
        if isinstance(result, Converged):
            continue
        if result.polarity == "pos":
            assert not (result.raster & ~gt).any()
        else:
            assert not (result.raster & gt).any()
        checked += 1
    assert checked >= 499


def test_stroke_count_law_is_geometric():
    cfg = TrainSimConfig()
    rng = rng_for(207)
    draws = np.array([sample_stroke_count(cfg, rng) for _ in range(100_000)])
    counts = np.bincount(draws, minlength=cfg.max_strokes + 1)[1:]
    for n in range(1, 6):
        ratio = counts[n] / counts[n - 1]
        assert abs(ratio - 0.8) <= 0.02
    weights = 0.8 ** np.arange(cfg.max_strokes)
    expected = weights / weights.sum() * len(draws)
    result = stats.chisquare(counts, expected)
    assert result.pvalue > 0.01


def test_geodesic_recovers_two_region_images_in_one_interaction():
    rng = rng_for(208)
    segmenter = GeodesicSegmenter()
    for _ in range(20):
        image, gt = two_region_sample(rng, size=48)
        rows = np.argwhere(gt)
        mid_r = int(np.median(rows[:, 0]))
        cols = np.flatnonzero(gt[mid_r])
        positive = np.zeros_like(gt)
        positive[mid_r, cols[len(cols) // 4] : cols[3 * len(cols) // 4] + 1] = True
        negative = np.zeros_like(gt)
        negative[0, :] = True
        request = SegmentationRequest(
            image=image,
            scribbles=ScribbleMaps(positive, negative),
            previous_mask=np.zeros_like(gt),
        )
        assert iou(segmenter.predict(request), gt) >= 0.99

    report = run_evaluation(two_region_dataset(20, seed=209), GeodesicSegmenter(), EvalConfig())
    assert report.noi[0.9] <= 1.05


def test_zoomed_and_full_frame_oracle_runs_agree():
    rng = rng_for(210)
    for i in range(20):
        gt = random_blob_mask((48, 48), rng, blobs=2)
        image = rng.integers(0, 256, size=(48, 48, 3)).astype(np.uint8)
        segmenter = OracleSegmenter(gt)
        plain = evaluate_sample(image, gt, segmenter, EvalConfig(), sample_id=f"z{i}")
        zoomed = evaluate_sample(
            image, gt, segmenter, EvalConfig(zoom_enabled=True), sample_id=f"z{i}"
        )
        assert plain.error is None and zoomed.error is None
        assert np.array_equal(plain.final_mask, zoomed.final_mask)


def test_thinning_preserves_component_count():
    rng = rng_for(211)
    for _ in range(500):
        mask = random_blob_mask((32, 32), rng, blobs=int(rng.integers(1, 5)))
        skeleton = medial_axis(mask)
        assert count_components(skeleton, 8) == count_components(mask, 8)
