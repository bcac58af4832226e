"""End-to-end loop-closure detection over an image sequence.

Per frame n: score the new image against every image older than the
exclusion window (images n - window .. n - 1 cannot be loop closures, they
are simply the recent past), run one Bayesian filter step on the score
vector, report candidates whose posterior clears the detection threshold,
then insert the frame into the index so later frames can retrieve it.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .bayes import BayesParams, detect, update_posteriors
from .datasets import DescriptorDataset, GroundTruth
from .descriptors import SubstringConfig
from .index import DEFAULT_BUCKET_CAP, MultiIndexTables
from .similarity import (
    SimilarityParams,
    approx_similarity,
    exact_similarity_vector,
)

__all__ = [
    "RunConfig",
    "FrameRecord",
    "RunReport",
    "run_loop_detection",
    "precision_recall",
    "recall_at_full_precision",
    "export_matrices",
    "write_report",
]

DEFAULT_EXCLUSION_WINDOW = 10


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a run's output for a given dataset."""

    substring: SubstringConfig = SubstringConfig()
    similarity: SimilarityParams = SimilarityParams()
    bayes: BayesParams = BayesParams()
    exclusion_window: int = DEFAULT_EXCLUSION_WINDOW
    bucket_cap: int | None = DEFAULT_BUCKET_CAP
    workers: int = 1
    exact_scores: bool = False

    def __post_init__(self) -> None:
        if self.exclusion_window < 0:
            raise ValueError("exclusion_window must be non-negative")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data)
        if "substring" in data:
            data["substring"] = SubstringConfig(**data["substring"])
        if "similarity" in data:
            data["similarity"] = SimilarityParams(**data["similarity"])
        if "bayes" in data:
            data["bayes"] = BayesParams(**data["bayes"])
        return cls(**data)


@dataclass
class FrameRecord:
    """Per-frame outputs and timings (seconds)."""

    frame: int
    scores: np.ndarray
    posterior: np.ndarray
    detections: list[int]
    distances_computed: int
    t_similarity: float
    t_inference: float
    t_insert: float

    @property
    def t_total(self) -> float:
        return self.t_similarity + self.t_inference + self.t_insert


@dataclass
class RunReport:
    """Output of one detection run."""

    config: dict
    frames: list[FrameRecord]
    n_images: int
    total_features: int
    memory_model_bytes: int

    @property
    def detected_pairs(self) -> list[tuple[int, int]]:
        """(query, candidate) pairs whose posterior cleared the threshold."""
        return [
            (record.frame, candidate)
            for record in self.frames
            for candidate in record.detections
        ]

    def posterior_pairs(self) -> list[tuple[int, int, float]]:
        """(query, candidate, posterior) for every scored pair."""
        return [
            (record.frame, candidate, float(p))
            for record in self.frames
            for candidate, p in enumerate(record.posterior)
        ]

    def frame_times(self, skip_warmup: int = 1) -> np.ndarray:
        """Total per-frame seconds, optionally dropping the first frames
        (JIT compilation lands on frame 0)."""
        return np.array([r.t_total for r in self.frames[skip_warmup:]])

    def total_distances(self) -> int:
        return sum(r.distances_computed for r in self.frames)

    def summary(self) -> dict:
        times = self.frame_times()
        return {
            "n_images": self.n_images,
            "total_features": self.total_features,
            "memory_model_bytes": self.memory_model_bytes,
            "detections": len(self.detected_pairs),
            "distance_computations": self.total_distances(),
            "mean_frame_seconds": float(times.mean()) if times.size else 0.0,
            "median_frame_seconds":
                float(np.median(times)) if times.size else 0.0,
            "max_frame_seconds": float(times.max()) if times.size else 0.0,
        }


def run_loop_detection(dataset: DescriptorDataset | Sequence[np.ndarray],
                       config: RunConfig = RunConfig()) -> RunReport:
    """Run the full detection pipeline over an image sequence."""
    images = dataset.images if isinstance(dataset, DescriptorDataset) \
        else list(dataset)
    if not images:
        raise ValueError("dataset must contain at least one image")
    tables = MultiIndexTables(config.substring, config.bucket_cap)
    previous: np.ndarray | None = None
    frames: list[FrameRecord] = []

    for n, image in enumerate(images):
        limit = max(0, n - config.exclusion_window)

        t0 = time.perf_counter()
        if limit > 0 and len(image) > 0:
            if config.exact_scores:
                arrays = tables.query_arrays()
                result = exact_similarity_vector(
                    image, arrays["store"][:tables.n_features],
                    arrays["feat_image"][:tables.n_features], limit,
                    tables.feature_counts, config.similarity)
            else:
                result = approx_similarity(tables, image, config.similarity,
                                           image_limit=limit,
                                           workers=config.workers)
            scores, n_distances = result.scores, result.distances_computed
        else:
            scores = np.zeros(limit, dtype=np.float64)
            n_distances = 0
        t1 = time.perf_counter()

        posterior = update_posteriors(previous, scores, config.bayes)
        detections = detect(posterior, config.bayes).tolist()
        t2 = time.perf_counter()

        tables.insert_image(n, image)
        t3 = time.perf_counter()

        frames.append(FrameRecord(
            frame=n, scores=scores, posterior=posterior,
            detections=detections, distances_computed=n_distances,
            t_similarity=t1 - t0, t_inference=t2 - t1, t_insert=t3 - t2,
        ))
        previous = posterior

    return RunReport(
        config=config.to_dict(),
        frames=frames,
        n_images=len(images),
        total_features=tables.n_features,
        memory_model_bytes=tables.memory_model_bytes(),
    )


# ----------------------------------------------------------------------
# metrics


def precision_recall(detections: Iterable[tuple[int, int]],
                     gt: GroundTruth) -> tuple[float, float]:
    """Precision and recall of a detection set against ground truth.

    Empty detections give precision 1.0 by convention; recall is 0.0
    whenever there are no true pairs to find.
    """
    detected = {
        (max(a, b), min(a, b)) for a, b in detections
    }
    true_positives = sum(1 for pair in detected if pair in gt.pairs)
    precision = true_positives / len(detected) if detected else 1.0
    recall = true_positives / len(gt.pairs) if gt.pairs else 0.0
    return precision, recall


def recall_at_full_precision(report: RunReport, gt: GroundTruth) -> float:
    """Best recall achievable at precision 1.0 by thresholding posteriors.

    Sweeps the detection threshold over the observed posterior values, from
    strictest to loosest; equal posteriors are admitted together. Returns
    0.0 when no threshold yields a false-positive-free non-empty detection
    set, and when the ground truth is empty.
    """
    if not gt.pairs:
        return 0.0
    entries = report.posterior_pairs()
    if not entries:
        return 0.0
    entries.sort(key=lambda e: -e[2])
    best = 0.0
    true_positives = 0
    i = 0
    while i < len(entries):
        j = i
        clean = True
        while j < len(entries) and entries[j][2] == entries[i][2]:
            query, candidate, _ = entries[j]
            if (query, candidate) in gt.pairs:
                true_positives += 1
            else:
                clean = False
            j += 1
        if not clean:
            break
        best = true_positives / len(gt.pairs)
        i = j
    return best


# ----------------------------------------------------------------------
# artifacts


def export_matrices(report: RunReport, out_dir: str | Path,
                    ) -> tuple[Path, Path]:
    """Write the similarity and detection matrices as CSV.

    Both are n_images x n_images with rows as candidates and columns as
    queries; entry (i, j) is image j scored against earlier image i. Pairs
    never scored (inside the exclusion window, or i >= j) stay zero, so the
    matrices are strictly lower triangular.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n = report.n_images
    similarity = np.zeros((n, n), dtype=np.float64)
    detections = np.zeros((n, n), dtype=np.int8)
    for record in report.frames:
        similarity[:len(record.scores), record.frame] = record.scores
        for candidate in record.detections:
            detections[candidate, record.frame] = 1
    similarity_path = out / "similarity_matrix.csv"
    detection_path = out / "detection_matrix.csv"
    np.savetxt(similarity_path, similarity, delimiter=",", fmt="%.10g")
    np.savetxt(detection_path, detections, delimiter=",", fmt="%d")
    return similarity_path, detection_path


def write_report(report: RunReport, out_dir: str | Path,
                 gt: GroundTruth | None = None,
                 matrices: bool = True) -> Path:
    """Write config.json, report.json and optionally the matrices.

    Returns the run directory. The report JSON carries the summary, per
    frame detections/timings, and metrics when ground truth is supplied.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    (out / "config.json").write_text(
        json.dumps(report.config, indent=2) + "\n")

    payload: dict = {
        "summary": report.summary(),
        "frames": [
            {
                "frame": record.frame,
                "detections": record.detections,
                "distances_computed": record.distances_computed,
                "t_similarity": record.t_similarity,
                "t_inference": record.t_inference,
                "t_insert": record.t_insert,
            }
            for record in report.frames
        ],
    }
    if gt is not None:
        precision, recall = precision_recall(report.detected_pairs, gt)
        payload["metrics"] = {
            "precision": precision,
            "recall": recall,
            "recall_at_full_precision":
                recall_at_full_precision(report, gt),
            "n_true_pairs": len(gt.pairs),
        }
    (out / "report.json").write_text(json.dumps(payload, indent=2) + "\n")

    if matrices:
        export_matrices(report, out)
    return out
