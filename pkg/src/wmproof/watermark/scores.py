"""Vectorized seed and g-value computation shared by embedding and detection.

Every function takes context/candidate token arrays of equal length (or a
scalar) and evaluates the keyed PRF row by row through the batch kernels.
"""
from __future__ import annotations

import numpy as np

from ..hashing.batch import hash_batch, less_than
from .params import G_THRESHOLD, WatermarkParams


def _col(x):
    return x if isinstance(x, (int, np.integer)) else np.asarray(x, dtype=np.int64)


def kgw_digests(params: WatermarkParams, sk: int, contexts: np.ndarray, cur) -> np.ndarray:
    """g for each row. ``contexts`` is (n, psi) with the oldest token first."""
    kind = params.hash_kind
    cur = _col(cur)
    if params.fused:
        return hash_batch(kind, [sk, _col(contexts[:, -1]), cur])
    sd = hash_batch(kind, [sk, _col(contexts[:, 0])])
    for c in range(1, contexts.shape[1]):
        sd = hash_batch(kind, [sd, _col(contexts[:, c])])
    if isinstance(cur, (int, np.integer)):
        return hash_batch(kind, [sd, cur])
    if sd.shape[0] == 1 and cur.shape[0] != 1:
        sd = np.broadcast_to(sd, (cur.shape[0], 4))
    return hash_batch(kind, [sd, cur])


def kgw_green(params, sk, contexts, cur) -> np.ndarray:
    return less_than(kgw_digests(params, sk, contexts, cur), params.threshold_green)


def synthid_seeds(params: WatermarkParams, sk: int, contexts: np.ndarray) -> np.ndarray:
    """Pairwise three-input chain over the context: h <- Hash(h, c0, c1)."""
    kind = params.hash_kind
    sd = None
    for c in range(0, contexts.shape[1], 2):
        lead = sk if sd is None else sd
        sd = hash_batch(kind, [lead, _col(contexts[:, c]), _col(contexts[:, c + 1])])
    return sd


def synthid_g(params: WatermarkParams, seeds: np.ndarray, cur, width: int) -> np.ndarray:
    """(width, n) 0/1 matrix of g_k for k = 1..width."""
    cur = _col(cur)
    n = seeds.shape[0] if isinstance(cur, (int, np.integer)) else cur.shape[0]
    if seeds.shape[0] == 1 and n != 1:
        seeds = np.broadcast_to(seeds, (n, 4))
    out = np.empty((width, n), dtype=np.int64)
    for k in range(1, width + 1):
        out[k - 1] = less_than(hash_batch(params.hash_kind, [seeds, cur, k]), G_THRESHOLD)
    return out


def segment_green(params: WatermarkParams, sk: int, prev, cur, j) -> np.ndarray:
    """Green indicator of Hash(Hash(sk, prev, j), cur) against floor(gamma P)."""
    kind = params.hash_kind
    prev = _col(prev)
    cur = _col(cur)
    j = _col(j)
    sd = hash_batch(kind, [sk, prev, j])
    if not isinstance(cur, (int, np.integer)) and sd.shape[0] == 1 and cur.shape[0] != 1:
        sd = np.broadcast_to(sd, (cur.shape[0], 4))
    return less_than(hash_batch(kind, [sd, cur]), params.threshold_green)
