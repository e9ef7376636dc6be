"""Scribble-driven interactive segmentation toolkit.

Raster primitives and skeletons, training-time scribble simulators,
a deterministic evaluation-time scribble generator, pluggable segmenters,
an NoI/NoF evaluation harness, and an annotation HTTP service.
"""
from .eval_sim import (
    AutoScribbleConfig,
    Converged,
    EvalScribble,
    SkeletonGraph,
    build_graph,
    longest_path,
    rasterize_eval_stroke,
    remove_cycles,
    simulate_interaction,
)
from .harness import (
    EvalConfig,
    InteractionTrace,
    MetricsReport,
    evaluate_sample,
    paste_back,
    run_evaluation,
    zoom_in_crop,
)
from .manifest import (
    DatasetManifest,
    ManifestEntry,
    Sample,
    load_manifest,
    load_sample,
    make_benchmark,
    save_manifest,
)
from .masks import (
    bounding_box,
    connected_components,
    dilate,
    distance_transform,
    erode,
    error_regions,
    iou,
    largest_component,
    load_mask,
    resize_mask,
    save_mask,
)
from .rng import rng_for
from .segmenters import (
    CropWindow,
    EmptySegmenter,
    GeodesicSegmenter,
    HttpSegmenter,
    OracleSegmenter,
    SegmentationRequest,
    SubprocessSegmenter,
    oracle_predict,
    segmenter_from_spec,
)
from .skeleton import medial_axis
from .strokes import ScribbleMaps, Stroke, rasterize_stroke
from .train_sim import (
    PerturbParams,
    TrainSimConfig,
    TrainingSample,
    apply_boundary_strategy,
    compose_training_sample,
    gen_axial_scribble,
    gen_bezier_scribble,
    gen_boundary_scribble,
    gen_linked_scribble,
    perturb_mask,
    sample_stroke_count,
    sample_thickness,
    simulate_previous_mask,
)

__version__ = "0.1.0"
