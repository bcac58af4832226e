"""Packed 256-bit binary descriptors.

A descriptor is stored as four little-endian ``uint64`` words. Bit ``i`` of
the descriptor lives in word ``i // 64`` at bit position ``i % 64``, which is
identical to interpreting the 32 raw bytes as one little-endian 256-bit
integer: bit 0 is the least significant bit of byte 0. Substring ``k`` of a
``(n_substrings, substring_bits)`` split covers bit positions
``[k * substring_bits, (k + 1) * substring_bits)``.

Scalar helpers here operate on Python integers and serve as the plain
reference implementations; batch operations live in :mod:`hashloop.kernels`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

DESCRIPTOR_BITS = 256
DESCRIPTOR_BYTES = 32
DESCRIPTOR_WORDS = 4

__all__ = [
    "DESCRIPTOR_BITS",
    "DESCRIPTOR_BYTES",
    "DESCRIPTOR_WORDS",
    "SubstringConfig",
    "as_descriptor_array",
    "pack_bytes",
    "unpack_bytes",
    "random_descriptors",
    "get_bit",
    "flip_bits",
    "hamming_distance",
    "substring_value",
    "substring_values",
]


@dataclass(frozen=True)
class SubstringConfig:
    """Disjoint split of the 256 descriptor bits into hash substrings.

    ``n_substrings * substring_bits`` must equal 256, so the admissible
    substring counts are the powers of two from 1 to 256.
    """

    n_substrings: int = 16
    substring_bits: int = 16

    def __post_init__(self) -> None:
        if self.n_substrings < 1 or self.substring_bits < 1:
            raise ValueError("substring counts and widths must be positive")
        if self.n_substrings * self.substring_bits != DESCRIPTOR_BITS:
            raise ValueError(
                f"n_substrings * substring_bits must equal {DESCRIPTOR_BITS}, "
                f"got {self.n_substrings} * {self.substring_bits}"
            )

    @classmethod
    def from_substring_count(cls, n_substrings: int) -> "SubstringConfig":
        if n_substrings < 1 or DESCRIPTOR_BITS % n_substrings != 0:
            raise ValueError(
                f"n_substrings must divide {DESCRIPTOR_BITS}, got {n_substrings}"
            )
        return cls(n_substrings, DESCRIPTOR_BITS // n_substrings)

    @property
    def n_bucket_slots(self) -> int:
        """Number of addressable buckets per table, ``2 ** substring_bits``."""
        return 1 << self.substring_bits


def as_descriptor_array(arr: np.ndarray) -> np.ndarray:
    """Validate and return descriptors shaped ``(n, 4)`` with dtype uint64."""
    arr = np.asarray(arr)
    if arr.dtype != np.uint64:
        raise TypeError(f"descriptors must be uint64 words, got {arr.dtype}")
    if arr.ndim == 1 and arr.shape[0] == DESCRIPTOR_WORDS:
        arr = arr.reshape(1, DESCRIPTOR_WORDS)
    if arr.ndim != 2 or arr.shape[1] != DESCRIPTOR_WORDS:
        raise ValueError(
            f"expected shape (n, {DESCRIPTOR_WORDS}), got {arr.shape}"
        )
    return np.ascontiguousarray(arr)


def pack_bytes(raw: bytes | np.ndarray) -> np.ndarray:
    """Pack raw descriptor bytes, ``n * 32`` of them, into ``(n, 4)`` uint64."""
    if isinstance(raw, np.ndarray):
        raw = np.ascontiguousarray(raw, dtype=np.uint8).tobytes()
    if len(raw) % DESCRIPTOR_BYTES != 0:
        raise ValueError(
            f"byte length {len(raw)} is not a multiple of {DESCRIPTOR_BYTES}"
        )
    words = np.frombuffer(raw, dtype="<u8").astype(np.uint64, copy=False)
    return words.reshape(-1, DESCRIPTOR_WORDS).copy()


def unpack_bytes(words: np.ndarray) -> bytes:
    """Inverse of :func:`pack_bytes`: ``(n, 4)`` uint64 to raw bytes."""
    return as_descriptor_array(words).astype("<u8", copy=False).tobytes()


def random_descriptors(rng: np.random.Generator, n: int) -> np.ndarray:
    """Draw ``n`` uniform random descriptors."""
    return rng.integers(0, 2**64, size=(n, DESCRIPTOR_WORDS), dtype=np.uint64)


def get_bit(words: np.ndarray, position: int) -> int:
    """Bit at ``position`` of a single descriptor, 0 or 1."""
    desc = as_descriptor_array(words)[0]
    if not 0 <= position < DESCRIPTOR_BITS:
        raise ValueError(f"bit position out of range: {position}")
    return int((int(desc[position >> 6]) >> (position & 63)) & 1)


def flip_bits(words: np.ndarray, positions: Iterable[int]) -> np.ndarray:
    """Return a copy of one descriptor with the given bit positions toggled."""
    desc = as_descriptor_array(words)[0].copy()
    for position in positions:
        if not 0 <= position < DESCRIPTOR_BITS:
            raise ValueError(f"bit position out of range: {position}")
        desc[position >> 6] ^= np.uint64(1) << np.uint64(position & 63)
    return desc


def _to_int(words: np.ndarray) -> int:
    """Whole descriptor as one little-endian Python integer."""
    return int.from_bytes(unpack_bytes(words), "little")


def hamming_distance(a: np.ndarray, b: np.ndarray) -> int:
    """Hamming distance between two single descriptors."""
    return (_to_int(a) ^ _to_int(b)).bit_count()


def substring_value(words: np.ndarray, k: int, config: SubstringConfig) -> int:
    """Value of substring ``k`` of one descriptor as an unsigned integer."""
    if not 0 <= k < config.n_substrings:
        raise ValueError(f"substring index out of range: {k}")
    width = config.substring_bits
    return (_to_int(words) >> (k * width)) & ((1 << width) - 1)


def substring_values(words: np.ndarray, config: SubstringConfig) -> list[int]:
    """All substring values of one descriptor, in substring order."""
    return [substring_value(words, k, config) for k in range(config.n_substrings)]
