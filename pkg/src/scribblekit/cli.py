"""Command-line entry points.

Subcommands: serve (annotation service), simulate-train (training scribble
corpora), auto-scribble (one deterministic corrective stroke), eval
(NoI/NoF benchmark), and make-benchmark (per-category subsampling).
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .eval_sim import AutoScribbleConfig, Converged, simulate_interaction
from .harness import EvalConfig, run_evaluation
from .manifest import ManifestError, iter_samples, load_manifest, make_benchmark, save_manifest
from .masks import load_mask, save_mask
from .rng import rng_for
from .segmenters import OracleSegmenter, segmenter_from_spec
from .train_sim import TrainSimConfig, compose_training_sample

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONVERGED = 2


def _parse_key_values(path: str) -> dict:
    """Read ``key = value`` lines into typed TrainSimConfig keyword arguments."""
    fields = {f.name: f for f in dataclasses.fields(TrainSimConfig)}
    out: dict = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in fields or key == "perturb":
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
        out[key] = _coerce(key, value)
    return out


def _coerce(key: str, value: str):
    if key in ("max_strokes", "rng_seed"):
        return int(value)
    if key in ("decay", "proportion_axial", "proportion_boundary", "proportion_linked", "cold_start_prob"):
        return float(value)
    if key == "thickness_range":
        lo, hi = (int(v) for v in value.split(","))
        return (lo, hi)
    if key == "pred_perturb_ratio":
        a, b = (float(v) for v in value.replace(":", ",").split(","))
        return (a, b)
    return value


def _cmd_simulate_train(args: argparse.Namespace) -> int:
    overrides = _parse_key_values(args.config) if args.config else {}
    if args.seed is not None:
        overrides["rng_seed"] = args.seed
    cfg = TrainSimConfig(**overrides)
    manifest = load_manifest(args.manifest)
    root = Path(args.manifest).parent
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    config_echo = dataclasses.asdict(cfg)
    written = 0
    for index, item in enumerate(iter_samples(manifest, root)):
        if not hasattr(item, "gt"):
            print(f"skipping {item.sample_id}: {item.message}", file=sys.stderr)
            continue
        rng = rng_for(cfg.rng_seed, index)
        sample = compose_training_sample(item.image, item.gt, cfg, rng)
        save_mask(sample.scribbles.positive, out_dir / f"{item.sample_id}_pos.png")
        save_mask(sample.scribbles.negative, out_dir / f"{item.sample_id}_neg.png")
        save_mask(sample.previous_mask, out_dir / f"{item.sample_id}_prev.png")
        payload = {
            "id": item.sample_id,
            "strokes": [stroke.to_payload() for stroke in sample.strokes],
            "config": config_echo,
        }
        (out_dir / f"{item.sample_id}.json").write_text(json.dumps(payload, sort_keys=True))
        written += 1
    print(f"wrote {written} samples to {out_dir}")
    return EXIT_OK


def _cmd_auto_scribble(args: argparse.Namespace) -> int:
    gt = load_mask(args.gt)
    pred = load_mask(args.pred) if args.pred else np.zeros_like(gt)
    cfg = AutoScribbleConfig(radius=args.radius, thickness=args.thickness)
    result = simulate_interaction(gt, pred, cfg)
    if isinstance(result, Converged):
        print("converged: prediction matches ground truth")
        return EXIT_CONVERGED
    if args.out:
        save_mask(result.raster, args.out)
    if args.json:
        Path(args.json).write_text(json.dumps(result.stroke.to_payload(), sort_keys=True))
    print(f"{result.polarity} scribble, {int(result.raster.sum())} pixels")
    return EXIT_OK


def _cmd_eval(args: argparse.Namespace) -> int:
    cfg = EvalConfig(
        target_ious=tuple(float(v) for v in args.targets.split(",")),
        max_interactions=args.max,
        zoom_enabled=args.zoom,
    )
    manifest = load_manifest(args.manifest)
    root = Path(args.manifest).parent
    dataset = list(iter_samples(manifest, root))
    if args.segmenter == "oracle":
        def segmenter(sample):
            return OracleSegmenter(sample.gt, noise_level=args.noise, seed=args.seed)
    else:
        segmenter = segmenter_from_spec(args.segmenter)
    report = run_evaluation(
        dataset, segmenter, cfg, workers=args.workers, dataset_name=manifest.name
    )
    if args.report:
        Path(args.report).write_text(report.to_json())
    if args.csv:
        report.write_csv(args.csv)
    for target in sorted(report.noi):
        print(
            f"{manifest.name}: NoI@{target:g} = {report.noi[target]:.2f}, "
            f"NoF@{target:g} = {report.nof[target]} of {report.sample_count}"
        )
    for failure in report.failed_loads:
        print(f"failed to load {failure['id']}: {failure['error']}", file=sys.stderr)
    return EXIT_OK


def _cmd_make_benchmark(args: argparse.Namespace) -> int:
    manifest = load_manifest(args.manifest)
    benchmark = make_benchmark(manifest, per_category=args.per_category, seed=args.seed)
    save_manifest(benchmark, args.out)
    print(f"kept {len(benchmark.entries)} of {len(manifest.entries)} entries")
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(idle_timeout=args.idle_timeout, static_dir=args.static)
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scribblekit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the annotation HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--static", default=None, help="directory of UI assets to serve at /")
    p.add_argument("--idle-timeout", type=float, default=1800.0)
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("simulate-train", help="generate training scribbles and previous masks")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", default=None, help="key = value overrides for the simulator")
    p.set_defaults(func=_cmd_simulate_train)

    p = sub.add_parser("auto-scribble", help="deterministic corrective stroke for gt vs pred")
    p.add_argument("--gt", required=True)
    p.add_argument("--pred", default=None, help="defaults to an empty mask")
    p.add_argument("--out", default=None, help="write the stroke raster PNG here")
    p.add_argument("--json", default=None, help="write the vector stroke here")
    p.add_argument("--thickness", type=int, default=3)
    p.add_argument("--radius", type=float, default=1.5)
    p.set_defaults(func=_cmd_auto_scribble)

    p = sub.add_parser("eval", help="run the NoI/NoF benchmark")
    p.add_argument("--manifest", required=True)
    p.add_argument("--segmenter", default="geodesic",
                   help="oracle | empty | geodesic | http:URL | subprocess:CMD")
    p.add_argument("--targets", default="0.85,0.90")
    p.add_argument("--max", type=int, default=20)
    p.add_argument("--report", default=None)
    p.add_argument("--csv", default=None)
    p.add_argument("--zoom", action="store_true")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--noise", type=float, default=0.0, help="oracle degradation level")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("make-benchmark", help="subsample a manifest per category")
    p.add_argument("--manifest", required=True)
    p.add_argument("--per-category", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_make_benchmark)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, ManifestError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
