"""Pure numpy fallback kernels.

Same signatures and semantics as the numba backend. Queries vectorize the
bucket-chain walk as a shrinking frontier; insertion is a plain Python loop.
The stamp/stamp_base scratch arguments are accepted for signature parity but
candidate deduplication here uses np.unique on (feature, candidate) pairs.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "numpy"

_HAMMING_CHUNK_ELEMS = 2_000_000


def extract_keys(words, n_substrings, substring_bits, out):
    """Fill out[f, k] with substring k of descriptor f."""
    mask = np.uint64((1 << substring_bits) - 1)
    for k in range(n_substrings):
        start = k * substring_bits
        word = start >> 6
        shift = np.uint64(start & 63)
        out[:, k] = ((words[:, word] >> shift) & mask).astype(np.uint32)


def insert_refs(keys, head, bucket_size, entry_val, entry_next,
                arena_len, first_ref, bucket_cap):
    """Push feature refs into their buckets; full buckets skip. Returns new arena length."""
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


def query_accumulate(qwords, keys, head, entry_val, entry_next, store,
                     feat_image, image_limit, stamp, stamp_base,
                     max_distance, inv_sigma_sq, acc):
    """Vectorized equivalent of the JIT query kernel. Returns candidate-pair count."""
    n, m = keys.shape
    if n == 0:
        return 0
    owner = np.repeat(np.arange(n, dtype=np.int64), m)
    frontier = head[np.arange(m)[None, :], keys.astype(np.int64)]
    frontier = frontier.astype(np.int64).ravel()

    feats: list[np.ndarray] = []
    cands: list[np.ndarray] = []
    while True:
        live = frontier >= 0
        if not live.any():
            break
        owner = owner[live]
        ptrs = frontier[live]
        feats.append(owner.copy())
        cands.append(entry_val[ptrs].astype(np.int64))
        frontier = entry_next[ptrs].astype(np.int64)

    if not feats:
        return 0
    f_all = np.concatenate(feats)
    g_all = np.concatenate(cands)

    # Deduplicate per (query feature, candidate feature) pair.
    span = np.int64(feat_image.shape[0])
    pair = np.unique(f_all * span + g_all)
    f_u = pair // span
    g_u = pair % span

    img = feat_image[g_u]
    keep = img < image_limit
    f_u = f_u[keep]
    g_u = g_u[keep]
    img = img[keep]
    n_candidates = int(f_u.size)
    if n_candidates == 0:
        return 0

    xor = qwords[f_u] ^ store[g_u]
    dist = np.bitwise_count(xor).sum(axis=1, dtype=np.int64)
    ok = dist <= max_distance
    if ok.any():
        fd = dist[ok].astype(np.float64)
        np.add.at(acc, img[ok], np.exp(-(fd * fd) * inv_sigma_sq))
    return n_candidates


def hamming_matrix(a, b, out):
    """out[i, j] = Hamming distance between a[i] and b[j]; both (n, 4) uint64."""
    na = a.shape[0]
    nb = b.shape[0]
    if na == 0 or nb == 0:
        return
    rows = max(1, _HAMMING_CHUNK_ELEMS // max(nb, 1))
    for i0 in range(0, na, rows):
        i1 = min(i0 + rows, na)
        xor = a[i0:i1, None, :] ^ b[None, :, :]
        out[i0:i1] = np.bitwise_count(xor).sum(axis=2, dtype=np.int32)


def exact_scores(qwords, db_words, db_image, image_limit,
                 max_distance, inv_sigma_sq, acc):
    """Exhaustive pairwise accumulation; returns the pair count."""
    keep = db_image < image_limit
    words = db_words[keep]
    images = db_image[keep]
    n_q = qwords.shape[0]
    n_db = words.shape[0]
    if n_q == 0 or n_db == 0:
        return 0
    cols = max(1, _HAMMING_CHUNK_ELEMS // max(n_q, 1))
    for j0 in range(0, n_db, cols):
        j1 = min(j0 + cols, n_db)
        xor = qwords[:, None, :] ^ words[None, j0:j1, :]
        dist = np.bitwise_count(xor).sum(axis=2, dtype=np.int64)
        fd = dist.astype(np.float64)
        phi = np.where(dist <= max_distance,
                       np.exp(-(fd * fd) * inv_sigma_sq), 0.0)
        np.add.at(acc, images[j0:j1], phi.sum(axis=0))
    return n_q * n_db
