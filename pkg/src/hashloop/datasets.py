"""Dataset containers, file formats, and synthetic dataset generation.

Binary descriptor file (little-endian throughout):

    magic   4 bytes  b"MILD"
    u32     format version, currently 1
    u32     descriptor size in bytes, must be 32
    u32     image count
    per image:
        u32    feature count
        bytes  feature count * 32 descriptor bytes

Ground-truth pair file: plain text, one loop pair per line as two integer
image ids separated by whitespace, ``#`` starts a comment, blank lines
ignored. Pairs are unordered on disk and normalized in memory so the larger
id is the query.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .analysis import INLIER_MODEL, DistanceModel, distance_pmf
from .descriptors import (
    DESCRIPTOR_BITS,
    DESCRIPTOR_BYTES,
    as_descriptor_array,
    pack_bytes,
    random_descriptors,
    unpack_bytes,
)

__all__ = [
    "MAGIC",
    "FORMAT_VERSION",
    "DatasetFormatError",
    "GroundTruthFormatError",
    "DescriptorDataset",
    "write_dataset",
    "read_dataset",
    "GroundTruth",
    "save_ground_truth",
    "load_ground_truth",
    "matrix_to_pairs",
    "SyntheticSpec",
    "generate_synthetic",
]

MAGIC = b"MILD"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<4sIII")
_U32 = struct.Struct("<I")


class DatasetFormatError(ValueError):
    """Malformed descriptor file; ``offset`` is the failing byte position."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class GroundTruthFormatError(ValueError):
    """Malformed ground-truth input; ``line`` is the failing line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"{message} (line {line})")
        self.line = line


@dataclass
class DescriptorDataset:
    """An ordered sequence of images, each an (n_i, 4) uint64 descriptor array."""

    images: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.images = [
            as_descriptor_array(img) if len(img) else
            np.empty((0, 4), dtype=np.uint64)
            for img in self.images
        ]

    @property
    def n_images(self) -> int:
        return len(self.images)

    @property
    def feature_counts(self) -> list[int]:
        return [img.shape[0] for img in self.images]

    @property
    def total_features(self) -> int:
        return sum(self.feature_counts)

    def __iter__(self):
        return iter(self.images)

    def __len__(self) -> int:
        return len(self.images)


def write_dataset(dataset: DescriptorDataset, path: str | Path) -> None:
    """Serialize a dataset to the binary descriptor format."""
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, DESCRIPTOR_BYTES,
                              dataset.n_images))
        for image in dataset.images:
            fh.write(_U32.pack(image.shape[0]))
            fh.write(unpack_bytes(image) if image.shape[0] else b"")


def read_dataset(path: str | Path) -> DescriptorDataset:
    """Parse a binary descriptor file, rejecting any structural defect."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise DatasetFormatError(
            f"truncated header: need {_HEADER.size} bytes, file has "
            f"{len(data)}", len(data))
    magic, version, desc_bytes, n_images = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise DatasetFormatError(
            f"bad magic {magic!r}: expected {MAGIC!r}", 0)
    if version != FORMAT_VERSION:
        raise DatasetFormatError(
            f"unsupported format version {version}: expected "
            f"{FORMAT_VERSION}", 4)
    if desc_bytes != DESCRIPTOR_BYTES:
        raise DatasetFormatError(
            f"unsupported descriptor size {desc_bytes}: expected "
            f"{DESCRIPTOR_BYTES}", 8)

    images: list[np.ndarray] = []
    offset = _HEADER.size
    for i in range(n_images):
        if offset + _U32.size > len(data):
            raise DatasetFormatError(
                f"truncated file: missing feature count of image {i}", offset)
        (count,) = _U32.unpack_from(data, offset)
        offset += _U32.size
        payload = count * DESCRIPTOR_BYTES
        if offset + payload > len(data):
            raise DatasetFormatError(
                f"truncated file: image {i} declares {count} descriptors "
                f"({payload} bytes) but only {len(data) - offset} bytes "
                f"remain", offset)
        if count:
            images.append(pack_bytes(data[offset:offset + payload]))
        else:
            images.append(np.empty((0, 4), dtype=np.uint64))
        offset += payload
    if offset != len(data):
        raise DatasetFormatError(
            f"trailing data: {len(data) - offset} unexpected bytes", offset)
    return DescriptorDataset(images)


# ----------------------------------------------------------------------
# ground truth


def _normalize_pair(a: int, b: int, line: int,
                    n_images: int | None) -> tuple[int, int]:
    if a == b:
        raise GroundTruthFormatError(
            f"an image cannot close a loop with itself: {a}", line)
    if a < 0 or b < 0:
        raise GroundTruthFormatError(f"negative image id in pair {a} {b}",
                                     line)
    query, candidate = (a, b) if a > b else (b, a)
    if n_images is not None and query >= n_images:
        raise GroundTruthFormatError(
            f"image id {query} out of range for {n_images} images", line)
    return query, candidate


@dataclass(frozen=True)
class GroundTruth:
    """Set of true loop pairs, each normalized to (query, candidate) with
    query > candidate."""

    pairs: frozenset[tuple[int, int]]

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]],
                   n_images: int | None = None) -> "GroundTruth":
        normalized = {
            _normalize_pair(int(a), int(b), line, n_images)
            for line, (a, b) in enumerate(pairs, start=1)
        }
        return cls(frozenset(normalized))

    def __len__(self) -> int:
        return len(self.pairs)

    def __contains__(self, pair: tuple[int, int]) -> bool:
        query, candidate = pair
        if query < candidate:
            query, candidate = candidate, query
        return (query, candidate) in self.pairs


def save_ground_truth(gt: GroundTruth, path: str | Path) -> None:
    path = Path(path)
    with path.open("w") as fh:
        fh.write("# loop pairs: query candidate\n")
        for query, candidate in sorted(gt.pairs):
            fh.write(f"{query} {candidate}\n")


def load_ground_truth(path: str | Path,
                      n_images: int | None = None) -> GroundTruth:
    pairs: set[tuple[int, int]] = set()
    with Path(path).open() as fh:
        for line_no, raw in enumerate(fh, start=1):
            text = raw.split("#", 1)[0].strip()
            if not text:
                continue
            parts = text.split()
            if len(parts) != 2:
                raise GroundTruthFormatError(
                    f"expected two integers, got {text!r}", line_no)
            try:
                a, b = int(parts[0]), int(parts[1])
            except ValueError:
                raise GroundTruthFormatError(
                    f"expected two integers, got {text!r}", line_no) from None
            pairs.add(_normalize_pair(a, b, line_no, n_images))
    return GroundTruth(frozenset(pairs))


def matrix_to_pairs(path: str | Path,
                    n_images: int | None = None) -> GroundTruth:
    """Convert a square 0/1 matrix (CSV or whitespace) to loop pairs.

    Any nonzero entry (i, j) marks a loop between images i and j; the matrix
    may be full, upper, or lower triangular. Nonzero diagonal entries are
    rejected.
    """
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines:
        raise GroundTruthFormatError("empty matrix file", 1)
    delimiter = "," if "," in lines[0] else None
    matrix = np.loadtxt(path, delimiter=delimiter, ndmin=2)
    if matrix.shape[0] != matrix.shape[1]:
        raise GroundTruthFormatError(
            f"matrix must be square, got {matrix.shape}", 1)
    rows, cols = np.nonzero(matrix)
    pairs: set[tuple[int, int]] = set()
    for i, j in zip(rows.tolist(), cols.tolist()):
        pairs.add(_normalize_pair(i, j, int(i) + 1, n_images))
    return GroundTruth(frozenset(pairs))


# ----------------------------------------------------------------------
# synthetic generation


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a reproducible synthetic dataset.

    Every image gets ``features_per_image`` uniform random descriptors. For
    each loop pair (query, candidate), a ``inlier_fraction`` share of the
    query's features is replaced by copies of the candidate's features with
    a sampled number of distinct bit flips; flip counts are drawn from
    ``inlier_model`` truncated to ``[0, truncate_at]`` (no truncation when
    ``truncate_at`` is None).
    """

    n_images: int
    features_per_image: int
    loop_pairs: tuple[tuple[int, int], ...] = ()
    inlier_fraction: float = 0.6
    inlier_model: DistanceModel = INLIER_MODEL
    truncate_at: int | None = 60
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_images < 0 or self.features_per_image < 0:
            raise ValueError("image and feature counts must be non-negative")
        if not 0.0 <= self.inlier_fraction <= 1.0:
            raise ValueError("inlier_fraction must be in [0, 1]")
        if self.truncate_at is not None and \
                not 0 <= self.truncate_at <= DESCRIPTOR_BITS:
            raise ValueError(
                f"truncate_at must be in [0, {DESCRIPTOR_BITS}] or None")


def _flip_count_pmf(spec: SyntheticSpec) -> np.ndarray:
    pmf = distance_pmf(spec.inlier_model)
    if spec.truncate_at is not None:
        pmf = pmf.copy()
        pmf[spec.truncate_at + 1:] = 0.0
        total = pmf.sum()
        if total <= 0:
            raise ValueError("truncation removed all probability mass")
        pmf /= total
    return pmf


def generate_synthetic(spec: SyntheticSpec,
                       ) -> tuple[DescriptorDataset, GroundTruth]:
    """Build a seeded random dataset with planted loop closures."""
    pairs = [
        _normalize_pair(int(a), int(b), line, spec.n_images)
        for line, (a, b) in enumerate(spec.loop_pairs, start=1)
    ]
    rng = np.random.default_rng(spec.seed)
    images = [
        random_descriptors(rng, spec.features_per_image)
        for _ in range(spec.n_images)
    ]
    pmf = _flip_count_pmf(spec) if pairs else None
    n_copy = int(spec.inlier_fraction * spec.features_per_image)
    next_slot = {query: 0 for query, _ in pairs}
    for query, candidate in pairs:
        start = next_slot[query]
        if start + n_copy > spec.features_per_image:
            raise ValueError(
                f"image {query} appears in too many loop pairs: "
                f"{start + n_copy} inlier features exceed "
                f"{spec.features_per_image}"
            )
        next_slot[query] = start + n_copy
        flips = rng.choice(DESCRIPTOR_BITS + 1, size=n_copy, p=pmf)
        for j in range(n_copy):
            source = images[candidate][start + j].copy()
            positions = rng.choice(DESCRIPTOR_BITS, size=int(flips[j]),
                                   replace=False)
            for position in positions:
                source[position >> 6] ^= np.uint64(1) << np.uint64(
                    int(position) & 63)
            images[query][start + j] = source
    return (DescriptorDataset(images),
            GroundTruth(frozenset(pairs)))
