"""Closed-form retrieval analysis for the substring index.

Model: a feature pair at Hamming distance d spreads its d differing bits
independently and uniformly over the ``m`` substrings (balls into bins). The
pair is retrieved when at least one substring receives no differing bit.
By inclusion-exclusion over which substrings stay clean:

    recall_probability(m, d) = sum_{k=1..m} (-1)^(k+1) * C(m, k) * (1 - k/m)^d

For d < m the pigeonhole principle forces an empty substring, so the value
is exactly 1. Weighting this probability by a distance distribution gives
the two design curves: expected recall of matching pairs (drawn from a
low-distance inlier distribution) and expected retrieval rate of
non-matching pairs (high-distance outliers), the latter being proportional
to the distance computations a query costs.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .descriptors import DESCRIPTOR_BITS

__all__ = [
    "DistanceModel",
    "INLIER_MODEL",
    "OUTLIER_MODEL",
    "recall_probability",
    "recall_curve",
    "distance_pmf",
    "expected_inlier_recall",
    "expected_outlier_hit_rate",
    "tradeoff_table",
    "write_curves",
    "simulate_ball_placement",
    "RECALL_CURVE_HEADER",
    "TRADEOFF_HEADER",
]

RECALL_CURVE_HEADER = ("m", "d", "p_recall")
TRADEOFF_HEADER = ("m", "R", "E")


@dataclass(frozen=True)
class DistanceModel:
    """Gaussian model of a Hamming-distance population, discretized onto
    the integer support [0, 256]."""

    mean: float
    stddev: float

    def __post_init__(self) -> None:
        if self.stddev <= 0:
            raise ValueError(f"stddev must be positive, got {self.stddev}")


INLIER_MODEL = DistanceModel(mean=32.0, stddev=10.0)
OUTLIER_MODEL = DistanceModel(mean=128.0, stddev=20.0)


def recall_probability(m: int, d: int) -> float:
    """Probability that d differing bits leave at least one of m substrings clean.

    Exactly 1 for d < m (pigeonhole). The inclusion-exclusion sum runs in
    compensated (Kahan) arithmetic; the result is clamped to [0, 1].
    """
    if m < 1:
        raise ValueError(f"m must be positive, got {m}")
    if d < 0:
        raise ValueError(f"d must be non-negative, got {d}")
    if d < m:
        return 1.0
    total = 0.0
    carry = 0.0
    for k in range(1, m + 1):
        term = math.comb(m, k) * (1.0 - k / m) ** d
        if k % 2 == 0:
            term = -term
        y = term - carry
        t = total + y
        carry = (t - total) - y
        total = t
    return min(1.0, max(0.0, total))


def recall_curve(m: int, d_max: int = DESCRIPTOR_BITS) -> np.ndarray:
    """recall_probability(m, d) for d in [0, d_max], shape (d_max + 1,)."""
    return np.array([recall_probability(m, d) for d in range(d_max + 1)])


def distance_pmf(model: DistanceModel) -> np.ndarray:
    """Gaussian density sampled at d = 0..256 and renormalized to sum 1."""
    d = np.arange(DESCRIPTOR_BITS + 1, dtype=np.float64)
    z = (d - model.mean) / model.stddev
    weights = np.exp(-0.5 * z * z)
    return weights / weights.sum()


def expected_inlier_recall(m: int, distance_limit: int = 60,
                           model: DistanceModel = INLIER_MODEL) -> float:
    """Probability-weighted recall of matching pairs with d <= distance_limit."""
    return _weighted_recall(m, distance_limit, model)


def expected_outlier_hit_rate(m: int, distance_limit: int = 60,
                              model: DistanceModel = OUTLIER_MODEL) -> float:
    """Probability-weighted retrieval rate of non-matching pairs.

    Proportional to the wasted distance computations per query. Evaluate
    with distance_limit=256 for the full retrieval cost including pairs
    beyond any scoring cutoff.
    """
    return _weighted_recall(m, distance_limit, model)


def _weighted_recall(m: int, distance_limit: int,
                     model: DistanceModel) -> float:
    if not 0 <= distance_limit <= DESCRIPTOR_BITS:
        raise ValueError(
            f"distance_limit must be in [0, {DESCRIPTOR_BITS}], "
            f"got {distance_limit}"
        )
    pmf = distance_pmf(model)
    return float(sum(
        recall_probability(m, d) * pmf[d] for d in range(distance_limit + 1)
    ))


def tradeoff_table(m_values: Sequence[int], distance_limit: int = 60,
                   inlier: DistanceModel = INLIER_MODEL,
                   outlier: DistanceModel = OUTLIER_MODEL,
                   ) -> list[tuple[int, float, float]]:
    """(m, expected inlier recall, expected outlier hit rate) per substring count."""
    return [
        (m,
         expected_inlier_recall(m, distance_limit, inlier),
         expected_outlier_hit_rate(m, distance_limit, outlier))
        for m in m_values
    ]


def write_curves(out_dir: str | Path,
                 m_values: Iterable[int] = (1, 2, 4, 8, 16, 32),
                 d_max: int = DESCRIPTOR_BITS,
                 distance_limit: int = 60,
                 inlier: DistanceModel = INLIER_MODEL,
                 outlier: DistanceModel = OUTLIER_MODEL,
                 ) -> tuple[Path, Path]:
    """Write recall_curve.csv and tradeoff.csv; returns their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    m_values = list(m_values)

    recall_path = out / "recall_curve.csv"
    with recall_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECALL_CURVE_HEADER)
        for m in m_values:
            for d, p in enumerate(recall_curve(m, d_max)):
                writer.writerow([m, d, f"{p:.17g}"])

    tradeoff_path = out / "tradeoff.csv"
    with tradeoff_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRADEOFF_HEADER)
        for m, r, e in tradeoff_table(m_values, distance_limit,
                                      inlier, outlier):
            writer.writerow([m, f"{r:.17g}", f"{e:.17g}"])

    return recall_path, tradeoff_path


def simulate_ball_placement(m: int, d: int, trials: int,
                            rng: np.random.Generator) -> float:
    """Monte-Carlo estimate of recall_probability(m, d).

    Throws d balls uniformly into m bins per trial and reports the fraction
    of trials leaving at least one bin empty.
    """
    if m < 1 or d < 0 or trials < 1:
        raise ValueError("need m >= 1, d >= 0, trials >= 1")
    if d == 0:
        return 1.0
    hits = 0
    batch = max(1, min(trials, 20_000_000 // max(d, 1)))
    done = 0
    while done < trials:
        n = min(batch, trials - done)
        balls = rng.integers(0, m, size=(n, d))
        counts = np.zeros((n, m), dtype=np.int32)
        rows = np.repeat(np.arange(n), d)
        np.add.at(counts, (rows, balls.ravel()), 1)
        hits += int(((counts == 0).any(axis=1)).sum())
        done += n
    return hits / trials
