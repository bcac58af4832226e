"""Command-line interface.

Subcommands:
    synth       generate a synthetic descriptor dataset with planted loops
    run         run loop-closure detection over a descriptor file
    analyze     write the retrieval probability and accuracy/cost curves
    gt-convert  convert a ground-truth matrix to the pair-list format
    bench       time the query path per backend against brute force
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import DistanceModel, write_curves
from .bayes import BayesParams
from .datasets import (
    DescriptorDataset,
    GroundTruth,
    SyntheticSpec,
    generate_synthetic,
    load_ground_truth,
    matrix_to_pairs,
    read_dataset,
    save_ground_truth,
    write_dataset,
)
from .descriptors import SubstringConfig
from .kernels import BACKENDS, numba_available, set_backend
from .pipeline import (
    RunConfig,
    precision_recall,
    recall_at_full_precision,
    run_loop_detection,
    write_report,
)
from .similarity import SimilarityParams, exact_similarity_vector

__all__ = ["main"]


def _parse_loop_pairs(items: list[str]) -> tuple[tuple[int, int], ...]:
    pairs: list[tuple[int, int]] = []
    for item in items:
        for chunk in item.replace(",", " ").split():
            left, sep, right = chunk.partition(":")
            if not sep:
                raise SystemExit(
                    f"error: loop pair must look like QUERY:CANDIDATE, "
                    f"got {chunk!r}")
            pairs.append((int(left), int(right)))
    return tuple(pairs)


def _cmd_synth(args: argparse.Namespace) -> int:
    spec = SyntheticSpec(
        n_images=args.images,
        features_per_image=args.features,
        loop_pairs=_parse_loop_pairs(args.loop),
        inlier_fraction=args.inlier_fraction,
        inlier_model=DistanceModel(args.inlier_mean, args.inlier_std),
        truncate_at=args.truncate,
        seed=args.seed,
    )
    dataset, gt = generate_synthetic(spec)
    write_dataset(dataset, args.out)
    print(f"wrote {dataset.n_images} images x {args.features} features "
          f"to {args.out}")
    if args.gt_out:
        save_ground_truth(gt, args.gt_out)
        print(f"wrote {len(gt)} ground-truth pairs to {args.gt_out}")
    return 0


def _build_run_config(args: argparse.Namespace) -> RunConfig:
    base = RunConfig()
    if args.config:
        base = RunConfig.from_dict(json.loads(Path(args.config).read_text()))
    substring = base.substring
    if args.substrings is not None:
        substring = SubstringConfig.from_substring_count(args.substrings)
    similarity = SimilarityParams(
        max_distance=args.max_distance if args.max_distance is not None
        else base.similarity.max_distance,
        sigma=args.sigma if args.sigma is not None else base.similarity.sigma,
    )
    bayes = base.bayes
    if args.threshold is not None:
        bayes = BayesParams(**{**_bayes_dict(base.bayes),
                               "detection_threshold": args.threshold})
    return RunConfig(
        substring=substring,
        similarity=similarity,
        bayes=bayes,
        exclusion_window=args.window if args.window is not None
        else base.exclusion_window,
        bucket_cap=args.bucket_cap if args.bucket_cap is not None
        else base.bucket_cap,
        workers=args.workers if args.workers is not None else base.workers,
        exact_scores=bool(args.exact) or base.exact_scores,
    )


def _bayes_dict(params: BayesParams) -> dict:
    from dataclasses import asdict
    return asdict(params)


def _cmd_run(args: argparse.Namespace) -> int:
    if args.backend:
        set_backend(args.backend)
    config = _build_run_config(args)
    dataset = read_dataset(args.dataset)
    gt = load_ground_truth(args.gt, dataset.n_images) if args.gt else None

    report = run_loop_detection(dataset, config)
    out = write_report(report, args.out, gt=gt,
                       matrices=not args.no_matrices)

    summary = report.summary()
    print(f"processed {summary['n_images']} images "
          f"({summary['total_features']} features)")
    print(f"mean frame time {summary['mean_frame_seconds'] * 1e3:.2f} ms, "
          f"median {summary['median_frame_seconds'] * 1e3:.2f} ms")
    print(f"distance computations: {summary['distance_computations']}")
    print(f"modelled index memory: "
          f"{summary['memory_model_bytes'] / 2**20:.1f} MiB")
    print(f"detections: {summary['detections']}")
    for query, candidate in report.detected_pairs:
        print(f"  loop: image {query} -> image {candidate}")
    if gt is not None:
        precision, recall = precision_recall(report.detected_pairs, gt)
        print(f"precision {precision:.4f}, recall {recall:.4f}, "
              f"recall at full precision "
              f"{recall_at_full_precision(report, gt):.4f}")
    print(f"run artifacts in {out}")
    return 0


def _cmd_analyze(args: argparse.Namespace) -> int:
    m_values = [int(v) for v in args.substring_counts.split(",")]
    recall_path, tradeoff_path = write_curves(
        args.out,
        m_values=m_values,
        d_max=args.d_max,
        distance_limit=args.distance_limit,
        inlier=DistanceModel(args.inlier_mean, args.inlier_std),
        outlier=DistanceModel(args.outlier_mean, args.outlier_std),
    )
    print(f"wrote {recall_path}")
    print(f"wrote {tradeoff_path}")
    return 0


def _cmd_gt_convert(args: argparse.Namespace) -> int:
    gt = matrix_to_pairs(args.matrix, n_images=args.images)
    save_ground_truth(gt, args.out)
    print(f"wrote {len(gt)} pairs to {args.out}")
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    spec = SyntheticSpec(
        n_images=args.images,
        features_per_image=args.features,
        loop_pairs=(),
        seed=args.seed,
    )
    dataset, _ = generate_synthetic(spec)
    config = RunConfig(
        substring=SubstringConfig.from_substring_count(args.substrings),
        workers=args.workers,
    )

    backends = [b.strip() for b in args.backends.split(",") if b.strip()]
    results: dict[str, dict] = {}
    for backend in backends:
        if backend == "numba" and not numba_available():
            print("numba backend unavailable, skipping")
            continue
        set_backend(backend)
        report = run_loop_detection(dataset, config)
        times = report.frame_times(skip_warmup=1) * 1e3
        results[backend] = {
            "mean_ms": float(times.mean()),
            "median_ms": float(np.median(times)),
            "max_ms": float(times.max()),
            "distances": report.total_distances(),
        }
        print(f"{backend:>6}: mean {times.mean():8.3f} ms/frame, "
              f"median {np.median(times):8.3f}, max {times.max():8.3f}")

    brute = None
    if args.brute_frames > 0:
        set_backend(backends[0] if backends else "numpy")
        brute = _time_brute(dataset, config, args.brute_frames)
        print(f" brute: mean {brute['mean_ms']:8.3f} ms/frame "
              f"(exhaustive scoring, {brute['n_frames']} sampled frames)")
        for backend, stats in results.items():
            print(f"        {backend} speedup vs brute: "
                  f"{brute['mean_ms'] / stats['mean_ms']:.1f}x")

    if args.json:
        payload = {"backends": results, "brute": brute,
                   "images": args.images, "features": args.features}
        Path(args.json).write_text(json.dumps(payload, indent=2) + "\n")
        print(f"wrote {args.json}")
    return 0


def _time_brute(dataset: DescriptorDataset, config: RunConfig,
                n_frames: int) -> dict:
    """Time exhaustive scoring at frames sampled across the sequence."""
    window = config.exclusion_window
    eligible = [n for n in range(len(dataset.images))
                if n - window > 0 and len(dataset.images[n])]
    if not eligible:
        return {"mean_ms": 0.0, "n_frames": 0}
    picks = [eligible[int(i)] for i in
             np.linspace(0, len(eligible) - 1, min(n_frames, len(eligible)))]
    times = []
    for n in sorted(set(picks)):
        limit = n - window
        words = np.vstack([dataset.images[k] for k in range(n)])
        image_ids = np.repeat(
            np.arange(n, dtype=np.int32),
            [len(dataset.images[k]) for k in range(n)])
        counts = np.array([len(dataset.images[k]) for k in range(n)])
        exact_similarity_vector(dataset.images[n][:1], words, image_ids,
                                limit, counts, config.similarity)
        t0 = time.perf_counter()
        exact_similarity_vector(dataset.images[n], words, image_ids,
                                limit, counts, config.similarity)
        times.append(time.perf_counter() - t0)
    return {"mean_ms": float(np.mean(times) * 1e3),
            "n_frames": len(times)}


def _add_synth(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--out", required=True, help="output descriptor file")
    p.add_argument("--gt-out", help="optional ground-truth pair file")
    p.add_argument("--images", type=int, default=100)
    p.add_argument("--features", type=int, default=100,
                   help="descriptors per image")
    p.add_argument("--loop", action="append", default=[],
                   metavar="QUERY:CANDIDATE",
                   help="planted loop pair, repeatable or comma separated")
    p.add_argument("--inlier-fraction", type=float, default=0.6)
    p.add_argument("--inlier-mean", type=float, default=32.0)
    p.add_argument("--inlier-std", type=float, default=10.0)
    p.add_argument("--truncate", type=int, default=60,
                   help="cap on sampled flip counts")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_synth)


def _add_run(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("run", help="run loop-closure detection")
    p.add_argument("dataset", help="binary descriptor file")
    p.add_argument("--out", required=True, help="run output directory")
    p.add_argument("--gt", help="ground-truth pair file for metrics")
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--substrings", type=int, help="substring table count")
    p.add_argument("--max-distance", type=int,
                   help="reject feature pairs beyond this distance")
    p.add_argument("--sigma", type=float, help="match kernel width in bits")
    p.add_argument("--threshold", type=float,
                   help="posterior detection threshold")
    p.add_argument("--window", type=int, help="exclusion window in frames")
    p.add_argument("--bucket-cap", type=int, help="max refs per bucket")
    p.add_argument("--workers", type=int, help="query worker threads")
    p.add_argument("--exact", action="store_true",
                   help="exhaustive scoring instead of the hash index")
    p.add_argument("--backend", choices=BACKENDS)
    p.add_argument("--no-matrices", action="store_true",
                   help="skip similarity/detection matrix CSVs")
    p.set_defaults(func=_cmd_run)


def _add_analyze(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("analyze", help="write analysis curve CSVs")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--substring-counts", default="1,2,4,8,16,32")
    p.add_argument("--d-max", type=int, default=256)
    p.add_argument("--distance-limit", type=int, default=60)
    p.add_argument("--inlier-mean", type=float, default=32.0)
    p.add_argument("--inlier-std", type=float, default=10.0)
    p.add_argument("--outlier-mean", type=float, default=128.0)
    p.add_argument("--outlier-std", type=float, default=20.0)
    p.set_defaults(func=_cmd_analyze)


def _add_gt_convert(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("gt-convert",
                       help="convert a ground-truth matrix to pairs")
    p.add_argument("matrix", help="square 0/1 matrix, CSV or whitespace")
    p.add_argument("--out", required=True, help="output pair file")
    p.add_argument("--images", type=int,
                   help="validate ids against this image count")
    p.set_defaults(func=_cmd_gt_convert)


def _add_bench(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("bench", help="time query backends vs brute force")
    p.add_argument("--images", type=int, default=200)
    p.add_argument("--features", type=int, default=800)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--substrings", type=int, default=16)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--backends", default="numba,numpy")
    p.add_argument("--brute-frames", type=int, default=3,
                   help="frames to time exhaustively (0 disables)")
    p.add_argument("--json", help="write results to this JSON file")
    p.set_defaults(func=_cmd_bench)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="hashloop",
        description="loop-closure detection over binary descriptors",
    )
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_synth(sub)
    _add_run(sub)
    _add_analyze(sub)
    _add_gt_convert(sub)
    _add_bench(sub)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
