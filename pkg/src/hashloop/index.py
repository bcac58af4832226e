"""Multi-index hash tables over packed binary descriptors.

Each descriptor is split into ``n_substrings`` disjoint substrings and a
reference to it is inserted into one bucket per substring table, keyed by the
substring value. Two descriptors within Hamming distance
``n_substrings - 1`` of each other must agree exactly on at least one
substring, so walking the query's own buckets retrieves every such neighbor.

Buckets are dense per table (``2 ** substring_bits`` head slots) and chain
their entries through a shared append-only arena, which keeps insertion
allocation-free and lets kernels traverse with raw int32 arrays. A bucket
that has reached ``bucket_cap`` entries silently drops further insertions for
that table only; already-stored entries remain queryable.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .descriptors import (
    DESCRIPTOR_BYTES,
    SubstringConfig,
    as_descriptor_array,
)
from .kernels import kernels

__all__ = [
    "FeatureRef",
    "MultiIndexTables",
    "memory_model_bytes",
    "MAX_SUBSTRING_BITS",
    "DEFAULT_BUCKET_CAP",
    "DEFAULT_POINTER_BYTES",
]

# Dense head arrays need 2 ** substring_bits slots per table, so wider
# substrings (fewer tables) are analysis-only configurations.
MAX_SUBSTRING_BITS = 16
DEFAULT_BUCKET_CAP = 128
DEFAULT_POINTER_BYTES = 8

_UNLIMITED_CAP = np.iinfo(np.int32).max


class FeatureRef(NamedTuple):
    """Identifies one stored feature: which image, which feature within it."""

    image_id: int
    feature_id: int


def memory_model_bytes(n_features: int,
                       config: SubstringConfig = SubstringConfig(),
                       pointer_bytes: int = DEFAULT_POINTER_BYTES) -> int:
    """Modelled index footprint in bytes.

    Every stored feature costs its 32 descriptor bytes plus one 4-byte
    bucket entry per table, and the bucket directory costs one pointer per
    slot across all tables:

    ``n_features * (32 + 4 * n_substrings)
    + n_substrings * 2**substring_bits * pointer_bytes``
    """
    if n_features < 0:
        raise ValueError("n_features must be non-negative")
    if pointer_bytes <= 0:
        raise ValueError("pointer_bytes must be positive")
    per_feature = DESCRIPTOR_BYTES + 4 * config.n_substrings
    directory = config.n_substrings * config.n_bucket_slots * pointer_bytes
    return n_features * per_feature + directory


class MultiIndexTables:
    """Append-only multi-index over images of 256-bit descriptors.

    Images must be inserted with consecutive ids starting at 0. Queries are
    read-only and safe to run concurrently; insertion must be exclusive.
    """

    def __init__(self, config: SubstringConfig = SubstringConfig(),
                 bucket_cap: int | None = DEFAULT_BUCKET_CAP):
        if config.substring_bits > MAX_SUBSTRING_BITS:
            raise ValueError(
                f"substring_bits must be <= {MAX_SUBSTRING_BITS} for dense "
                f"tables; use at least "
                f"{256 // MAX_SUBSTRING_BITS} substrings"
            )
        if bucket_cap is not None and bucket_cap < 1:
            raise ValueError("bucket_cap must be positive or None")
        self.config = config
        self.bucket_cap = bucket_cap
        self._cap = _UNLIMITED_CAP if bucket_cap is None else int(bucket_cap)

        m = config.n_substrings
        slots = config.n_bucket_slots
        self._head = np.full((m, slots), -1, dtype=np.int32)
        self._bucket_size = np.zeros((m, slots), dtype=np.int32)

        self._store = np.empty((0, 4), dtype=np.uint64)
        self._feat_image = np.empty(0, dtype=np.int32)
        self._entry_val = np.empty(0, dtype=np.int32)
        self._entry_next = np.empty(0, dtype=np.int32)
        self._arena_len = 0
        self._n_features = 0
        self._offsets = [0]

    # ------------------------------------------------------------------
    # bookkeeping

    @property
    def n_images(self) -> int:
        return len(self._offsets) - 1

    @property
    def n_features(self) -> int:
        return self._n_features

    @property
    def feature_counts(self) -> np.ndarray:
        """Stored descriptor count per image, shape (n_images,)."""
        return np.diff(np.asarray(self._offsets, dtype=np.int64))

    def image_features(self, image_id: int) -> np.ndarray:
        """View of one image's stored descriptors, shape (count, 4)."""
        if not 0 <= image_id < self.n_images:
            raise ValueError(f"unknown image id {image_id}")
        return self._store[self._offsets[image_id]:self._offsets[image_id + 1]]

    def memory_model_bytes(self,
                           pointer_bytes: int = DEFAULT_POINTER_BYTES) -> int:
        """Modelled footprint for the current feature count."""
        return memory_model_bytes(self._n_features, self.config, pointer_bytes)

    def _grow(self, n_new: int) -> None:
        needed = self._n_features + n_new
        if needed > self._store.shape[0]:
            cap = max(1024, needed, 2 * self._store.shape[0])
            store = np.empty((cap, 4), dtype=np.uint64)
            store[:self._n_features] = self._store[:self._n_features]
            self._store = store
            feat_image = np.empty(cap, dtype=np.int32)
            feat_image[:self._n_features] = self._feat_image[:self._n_features]
            self._feat_image = feat_image
        arena_needed = self._arena_len + n_new * self.config.n_substrings
        if arena_needed > self._entry_val.shape[0]:
            cap = max(4096, arena_needed, 2 * self._entry_val.shape[0])
            entry_val = np.empty(cap, dtype=np.int32)
            entry_val[:self._arena_len] = self._entry_val[:self._arena_len]
            self._entry_val = entry_val
            entry_next = np.empty(cap, dtype=np.int32)
            entry_next[:self._arena_len] = self._entry_next[:self._arena_len]
            self._entry_next = entry_next

    def extract_keys(self, descriptors: np.ndarray) -> np.ndarray:
        """Substring keys for each descriptor, shape (n, n_substrings) uint32."""
        words = as_descriptor_array(descriptors)
        out = np.empty((words.shape[0], self.config.n_substrings),
                       dtype=np.uint32)
        kernels().extract_keys(words, self.config.n_substrings,
                               self.config.substring_bits, out)
        return out

    # ------------------------------------------------------------------
    # mutation

    def insert_image(self, image_id: int, descriptors: np.ndarray) -> None:
        """Store an image's descriptors and index them in all tables.

        image_id must equal the current image count (sequential inserts).
        An image may be empty.
        """
        if image_id != self.n_images:
            raise ValueError(
                f"image ids must be sequential: expected {self.n_images}, "
                f"got {image_id}"
            )
        words = as_descriptor_array(descriptors) if len(descriptors) else \
            np.empty((0, 4), dtype=np.uint64)
        n = words.shape[0]
        if n == 0:
            self._offsets.append(self._n_features)
            return
        self._grow(n)
        first = self._n_features
        self._store[first:first + n] = words
        self._feat_image[first:first + n] = image_id
        keys = self.extract_keys(words)
        self._arena_len = int(kernels().insert_refs(
            keys, self._head, self._bucket_size,
            self._entry_val, self._entry_next,
            self._arena_len, first, self._cap,
        ))
        self._n_features = first + n
        self._offsets.append(self._n_features)

    # ------------------------------------------------------------------
    # queries

    def _ref_of(self, global_id: int) -> FeatureRef:
        image_id = int(self._feat_image[global_id])
        return FeatureRef(image_id, global_id - self._offsets[image_id])

    def query_candidates(self, descriptor: np.ndarray,
                         image_limit: int | None = None) -> set[FeatureRef]:
        """All stored features sharing at least one substring with the query.

        The result is deduplicated across tables. ``image_limit`` restricts
        candidates to images with id < image_limit.
        """
        words = as_descriptor_array(descriptor)
        if words.shape[0] != 1:
            raise ValueError("query_candidates takes a single descriptor")
        limit = self.n_images if image_limit is None else int(image_limit)
        keys = self.extract_keys(words)[0]
        found: set[int] = set()
        for k in range(self.config.n_substrings):
            p = int(self._head[k, keys[k]])
            while p >= 0:
                found.add(int(self._entry_val[p]))
                p = int(self._entry_next[p])
        return {
            self._ref_of(g)
            for g in found
            if self._feat_image[g] < limit
        }

    def query_arrays(self) -> dict[str, np.ndarray]:
        """Raw arrays consumed by the query kernels (read-only views)."""
        return {
            "head": self._head,
            "entry_val": self._entry_val,
            "entry_next": self._entry_next,
            "store": self._store,
            "feat_image": self._feat_image,
        }
