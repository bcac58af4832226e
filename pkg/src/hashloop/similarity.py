"""Pairwise image similarity from binary feature matches.

The similarity of two feature sets is the mean over all feature pairs of a
clipped Gaussian kernel on Hamming distance:

    phi(d) = exp(-d^2 / sigma^2)  if d <= max_distance else 0
    similarity(P, Q) = sum_{p in P, q in Q} phi(d(p, q)) / (|P| * |Q|)

The exact form scores every feature pair. The approximated form only scores
pairs that collide in at least one substring table of a
:class:`~hashloop.index.MultiIndexTables`; every pair it skips has all
substrings distinct, and pairs it retrieves use the exact distance, so the
approximation never exceeds the exact value and equals it whenever all pairs
within ``max_distance`` collide.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .descriptors import DESCRIPTOR_BITS, as_descriptor_array
from .index import MultiIndexTables
from .kernels import kernels

__all__ = [
    "SimilarityParams",
    "SimilarityResult",
    "feature_similarity",
    "exact_image_similarity",
    "exact_similarity_vector",
    "approx_similarity",
]


@dataclass(frozen=True)
class SimilarityParams:
    """Gaussian match kernel on Hamming distance.

    max_distance: distances above this score zero (feature pair rejected).
    sigma: Gaussian width in bits.
    """

    max_distance: int = 60
    sigma: float = 16.0

    def __post_init__(self) -> None:
        if not 0 <= self.max_distance <= DESCRIPTOR_BITS:
            raise ValueError(
                f"max_distance must be in [0, {DESCRIPTOR_BITS}], "
                f"got {self.max_distance}"
            )
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    @property
    def inv_sigma_sq(self) -> float:
        return 1.0 / (self.sigma * self.sigma)


class SimilarityResult(NamedTuple):
    """Scores per candidate image plus the distance-computation count."""

    scores: np.ndarray
    distances_computed: int


def feature_similarity(distance: int,
                       params: SimilarityParams = SimilarityParams()) -> float:
    """Match score of one feature pair at the given Hamming distance."""
    if not 0 <= distance <= DESCRIPTOR_BITS:
        raise ValueError(
            f"distance must be in [0, {DESCRIPTOR_BITS}], got {distance}"
        )
    if distance > params.max_distance:
        return 0.0
    return float(np.exp(-float(distance) ** 2 * params.inv_sigma_sq))


def _phi_sum(distances: np.ndarray, params: SimilarityParams) -> float:
    mask = distances <= params.max_distance
    if not mask.any():
        return 0.0
    d = distances[mask].astype(np.float64)
    return float(np.exp(-(d * d) * params.inv_sigma_sq).sum())


def exact_image_similarity(features_p: np.ndarray, features_q: np.ndarray,
                           params: SimilarityParams = SimilarityParams(),
                           ) -> float:
    """Exhaustive mean match score over all feature pairs of two images."""
    a = as_descriptor_array(features_p)
    b = as_descriptor_array(features_q)
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise ValueError("images must have at least one feature")
    out = np.empty((a.shape[0], b.shape[0]), dtype=np.int32)
    kernels().hamming_matrix(a, b, out)
    return _phi_sum(out, params) / (a.shape[0] * b.shape[0])


def exact_similarity_vector(query: np.ndarray, db_words: np.ndarray,
                            db_image: np.ndarray, image_limit: int,
                            feature_counts: np.ndarray,
                            params: SimilarityParams = SimilarityParams(),
                            ) -> SimilarityResult:
    """Exhaustive scores of one query image against stored images < image_limit.

    db_words/db_image hold every stored feature and its image id;
    feature_counts[k] is the stored feature count of image k. Images with no
    features score 0.
    """
    q = as_descriptor_array(query)
    acc = np.zeros(image_limit, dtype=np.float64)
    n_pairs = int(kernels().exact_scores(
        q, db_words, db_image, image_limit,
        params.max_distance, params.inv_sigma_sq, acc,
    ))
    counts = np.asarray(feature_counts[:image_limit], dtype=np.float64)
    nonzero = counts > 0
    acc[nonzero] /= q.shape[0] * counts[nonzero]
    return SimilarityResult(acc, n_pairs)


def _query_chunk(tables: MultiIndexTables, words: np.ndarray,
                 keys: np.ndarray, image_limit: int,
                 params: SimilarityParams) -> tuple[np.ndarray, int]:
    arrays = tables.query_arrays()
    acc = np.zeros(image_limit, dtype=np.float64)
    stamp = np.zeros(tables.n_features, dtype=np.int64)
    n = kernels().query_accumulate(
        words, keys, arrays["head"], arrays["entry_val"],
        arrays["entry_next"], arrays["store"], arrays["feat_image"],
        image_limit, stamp, 1,
        params.max_distance, params.inv_sigma_sq, acc,
    )
    return acc, int(n)


def approx_similarity(tables: MultiIndexTables, query: np.ndarray,
                      params: SimilarityParams = SimilarityParams(),
                      image_limit: int | None = None,
                      workers: int = 1) -> SimilarityResult:
    """Hash-approximated scores of one query image against stored images.

    Only feature pairs sharing at least one substring are scored, each
    exactly once. Scores start at zero for every image below image_limit;
    images with no stored features keep score 0. ``workers`` > 1 splits the
    query features across threads (the JIT kernels release the GIL).
    """
    words = as_descriptor_array(query)
    if words.shape[0] == 0:
        raise ValueError("query image must have at least one feature")
    limit = tables.n_images if image_limit is None else int(image_limit)
    if not 0 <= limit <= tables.n_images:
        raise ValueError(
            f"image_limit must be in [0, {tables.n_images}], got {limit}"
        )
    if limit == 0:
        return SimilarityResult(np.zeros(0, dtype=np.float64), 0)

    keys = tables.extract_keys(words)
    if workers <= 1 or words.shape[0] < 2 * workers:
        acc, n_pairs = _query_chunk(tables, words, keys, limit, params)
    else:
        bounds = np.linspace(0, words.shape[0], workers + 1, dtype=int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(
                lambda se: _query_chunk(tables, words[se[0]:se[1]],
                                        keys[se[0]:se[1]], limit, params),
                zip(bounds[:-1], bounds[1:]),
            ))
        acc = np.sum([p[0] for p in parts], axis=0)
        n_pairs = sum(p[1] for p in parts)

    counts = tables.feature_counts[:limit].astype(np.float64)
    nonzero = counts > 0
    acc[nonzero] /= words.shape[0] * counts[nonzero]
    return SimilarityResult(acc, n_pairs)
