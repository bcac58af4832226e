"""JIT-compiled kernels for key extraction, bucket insertion and queries.

All bit manipulation stays in uint64 to avoid implicit casts. Buckets use a
shared linked arena: ``head[k, key]`` points at the newest arena entry of
bucket ``key`` in table ``k``, each entry stores a global feature id and the
index of the next-older entry, -1 terminates a chain.
"""

from __future__ import annotations

import numpy as np
from numba import njit

BACKEND_NAME = "numba"

_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)
_S1 = np.uint64(1)
_S2 = np.uint64(2)
_S4 = np.uint64(4)
_S56 = np.uint64(56)


@njit(cache=True, nogil=True, inline="always")
def _popcount64(x):
    x = x - ((x >> _S1) & _M1)
    x = (x & _M2) + ((x >> _S2) & _M2)
    x = (x + (x >> _S4)) & _M4
    return (x * _H01) >> _S56


@njit(cache=True, nogil=True)
def extract_keys(words, n_substrings, substring_bits, out):
    """Fill out[f, k] with substring k of descriptor f.

    words: (F, 4) uint64, out: (F, n_substrings) uint32.
    substring_bits must divide 64 so no substring crosses a word boundary.
    """
    n = words.shape[0]
    mask = (np.uint64(1) << np.uint64(substring_bits)) - np.uint64(1)
    for f in range(n):
        for k in range(n_substrings):
            start = k * substring_bits
            word = start >> 6
            shift = np.uint64(start & 63)
            out[f, k] = np.uint32((words[f, word] >> shift) & mask)


@njit(cache=True, nogil=True)
def insert_refs(keys, head, bucket_size, entry_val, entry_next,
                arena_len, first_ref, bucket_cap):
    """Push feature refs first_ref..first_ref+F-1 into their buckets.

    keys: (F, m) uint32. A full bucket (size == bucket_cap) skips the
    insertion for that table only. Returns the new arena length.
    """
    n, m = keys.shape
    pos = arena_len
    for f in range(n):
        ref = first_ref + f
        for k in range(m):
            key = keys[f, k]
            if bucket_size[k, key] < bucket_cap:
                entry_val[pos] = ref
                entry_next[pos] = head[k, key]
                head[k, key] = pos
                bucket_size[k, key] += 1
                pos += 1
    return pos


@njit(cache=True, nogil=True)
def query_accumulate(qwords, keys, head, entry_val, entry_next, store,
                     feat_image, image_limit, stamp, stamp_base,
                     max_distance, inv_sigma_sq, acc):
    """Accumulate unnormalized similarity votes for one query image.

    For every query feature, walks its m buckets, deduplicates candidate
    features via the stamp array (stamp[g] == stamp_base + f marks feature g
    as already seen by query feature f), filters to images < image_limit,
    computes exact Hamming distance and adds exp(-d^2 * inv_sigma_sq) to
    acc[image] when d <= max_distance. Returns the number of distance
    computations (deduplicated candidate pairs).
    """
    n_candidates = 0
    n, m = keys.shape
    for f in range(n):
        cur = stamp_base + f
        q0 = qwords[f, 0]
        q1 = qwords[f, 1]
        q2 = qwords[f, 2]
        q3 = qwords[f, 3]
        for k in range(m):
            p = head[k, keys[f, k]]
            while p >= 0:
                g = entry_val[p]
                if stamp[g] != cur:
                    stamp[g] = cur
                    img = feat_image[g]
                    if img < image_limit:
                        d = (_popcount64(q0 ^ store[g, 0])
                             + _popcount64(q1 ^ store[g, 1])
                             + _popcount64(q2 ^ store[g, 2])
                             + _popcount64(q3 ^ store[g, 3]))
                        n_candidates += 1
                        if d <= np.uint64(max_distance):
                            fd = np.float64(d)
                            acc[img] += np.exp(-(fd * fd) * inv_sigma_sq)
                p = entry_next[p]
    return n_candidates


@njit(cache=True, nogil=True)
def hamming_matrix(a, b, out):
    """out[i, j] = Hamming distance between a[i] and b[j]; both (n, 4) uint64."""
    na = a.shape[0]
    nb = b.shape[0]
    for i in range(na):
        a0 = a[i, 0]
        a1 = a[i, 1]
        a2 = a[i, 2]
        a3 = a[i, 3]
        for j in range(nb):
            out[i, j] = np.int32(_popcount64(a0 ^ b[j, 0])
                                 + _popcount64(a1 ^ b[j, 1])
                                 + _popcount64(a2 ^ b[j, 2])
                                 + _popcount64(a3 ^ b[j, 3]))


@njit(cache=True, nogil=True)
def exact_scores(qwords, db_words, db_image, image_limit,
                 max_distance, inv_sigma_sq, acc):
    """Exhaustive pairwise accumulation over every stored feature.

    Same accumulation rule as query_accumulate but with no hashing: every
    (query feature, stored feature) pair with image < image_limit costs one
    distance computation. Returns that pair count.
    """
    n_q = qwords.shape[0]
    n_db = db_words.shape[0]
    n_pairs = 0
    for g in range(n_db):
        img = db_image[g]
        if img >= image_limit:
            continue
        b0 = db_words[g, 0]
        b1 = db_words[g, 1]
        b2 = db_words[g, 2]
        b3 = db_words[g, 3]
        for f in range(n_q):
            d = (_popcount64(qwords[f, 0] ^ b0)
                 + _popcount64(qwords[f, 1] ^ b1)
                 + _popcount64(qwords[f, 2] ^ b2)
                 + _popcount64(qwords[f, 3] ^ b3))
            n_pairs += 1
            if d <= np.uint64(max_distance):
                fd = np.float64(d)
                acc[img] += np.exp(-(fd * fd) * inv_sigma_sq)
    return n_pairs
