"""Vectorized hashing over many inputs at once.

A column is either a scalar int (broadcast), a 1-D array of small
non-negative integers, a sequence of Python ints, or an ``(n, 4)`` uint64
limb array. Results are ``(n, 4)`` canonical limb arrays.
"""
from __future__ import annotations

import os
from functools import lru_cache

import numpy as np

from ..errors import ArityUnsupported
from ..field import P
from . import _kernels as K
from .params import mimc_params, poseidon_params
from .reference import mimc_absorb

_threads = os.environ.get("WMPROOF_THREADS")
if _threads:
    import numba

    numba.set_num_threads(max(1, min(int(_threads), numba.config.NUMBA_NUM_THREADS)))


def ints_to_limbs(values) -> np.ndarray:
    obj = np.array([int(v) % P for v in values], dtype=object)
    out = np.empty((obj.shape[0], 4), dtype=np.uint64)
    for i in range(4):
        out[:, i] = ((obj >> (64 * i)) & K.MASK64).astype(np.uint64)
    return out


def limbs_to_ints(arr: np.ndarray) -> list:
    obj = arr.astype(object)
    vals = obj[:, 0] + (obj[:, 1] << 64) + (obj[:, 2] << 128) + (obj[:, 3] << 192)
    return [int(v) for v in vals]


def as_limbs(col, n: int | None = None) -> np.ndarray:
    """Normalize a column to an (n, 4) uint64 array."""
    if isinstance(col, (int, np.integer)):
        if n is None:
            raise ValueError("scalar column needs an explicit length")
        row = K.int_to_limbs(int(col) % P)
        return np.broadcast_to(row, (n, 4))
    if isinstance(col, np.ndarray):
        if col.ndim == 2 and col.shape[1] == 4 and col.dtype == np.uint64:
            return col
        if col.ndim == 1 and np.issubdtype(col.dtype, np.integer):
            if col.size and int(col.min()) < 0:
                raise ValueError("negative entries need explicit reduction")
            out = np.zeros((col.shape[0], 4), dtype=np.uint64)
            out[:, 0] = col.astype(np.uint64)
            return out
        raise ValueError(f"unsupported column array shape {col.shape} / {col.dtype}")
    return ints_to_limbs(col)


def _length(columns) -> int | None:
    """Common row count; length-1 columns broadcast against longer ones."""
    lengths = {c.shape[0] if isinstance(c, np.ndarray) else len(c)
               for c in columns if not isinstance(c, (int, np.integer))}
    if not lengths:
        return None
    n = max(lengths)
    if lengths - {1, n}:
        raise ValueError("column lengths differ")
    return n


def _broadcast(col, n: int) -> np.ndarray:
    arr = as_limbs(col, n)
    if arr.shape[0] == 1 and n != 1:
        arr = np.broadcast_to(arr, (n, 4))
    return arr


@lru_cache(maxsize=None)
def _mimc_consts():
    params = mimc_params()
    return np.stack([K.int_to_limbs(c * K.R % P) for c in params.round_constants])


@lru_cache(maxsize=None)
def _poseidon_tables(t: int):
    params = poseidon_params(t)
    consts = np.stack([np.stack([K.int_to_limbs(c * K.R % P) for c in row])
                       for row in params.round_constants])
    mds = np.array(params.mds, dtype=np.int64)
    return params, consts, mds


def hash_batch(kind: str, columns, n: int | None = None) -> np.ndarray:
    """Hash row-wise across ``columns`` (2 or 3 of them) with MiMC or Poseidon."""
    if len(columns) not in (2, 3):
        raise ArityUnsupported(f"expected 2 or 3 columns, got {len(columns)}")
    m = _length(columns)
    if m is None:
        m = 1 if n is None else n
    elif n is not None and n != m:
        raise ValueError("explicit length disagrees with columns")
    if kind == "mimc":
        # Leading scalar inputs only move the chaining value, so fold them once.
        h = 0
        rest = list(columns)
        while rest and isinstance(rest[0], (int, np.integer)):
            h = mimc_absorb(h, int(rest.pop(0)) % P)
        if not rest:
            return np.broadcast_to(K.int_to_limbs(h), (m, 4)).copy()
        cols = np.ascontiguousarray(np.stack([_broadcast(c, m) for c in rest]))
        h0 = K.int_to_limbs(h * K.R % P)
        return K.mimc_chain(h0, cols, _mimc_consts())
    if kind == "poseidon":
        params, consts, mds = _poseidon_tables(len(columns) + 1)
        cols = np.ascontiguousarray(np.stack([_broadcast(c, m) for c in columns]))
        return K.poseidon_perm_first(cols, consts, mds, params.full_rounds, params.partial_rounds)
    raise ValueError(f"unknown hash kind {kind!r}")


def less_than(arr: np.ndarray, threshold: int) -> np.ndarray:
    """Boolean mask of rows whose value is strictly below ``threshold``."""
    t = K.int_to_limbs(threshold)
    lt = np.zeros(arr.shape[0], dtype=bool)
    eq = np.ones(arr.shape[0], dtype=bool)
    for limb in (3, 2, 1, 0):
        col = arr[:, limb]
        lt |= eq & (col < t[limb])
        eq &= col == t[limb]
    return lt


def bin_index(arr: np.ndarray, bins: int) -> np.ndarray:
    """Index of the equal-width subrange of [0, P) holding each value."""
    idx = np.zeros(arr.shape[0], dtype=np.int64)
    for k in range(1, bins):
        bound = -(-k * P // bins)
        idx += ~less_than(arr, bound)
    return idx


def sponge_digest(values) -> int:
    """Poseidon sponge (width 4, rate 3) over a vector of field elements.

    The capacity lane starts at the vector length, so vectors that differ only
    by trailing zeros hash differently.
    """
    params, consts, mds = _poseidon_tables(4)
    data = values if isinstance(values, np.ndarray) else ints_to_limbs(values)
    tag = K.int_to_limbs(data.shape[0] * K.R % P)
    out = K.poseidon_sponge(np.ascontiguousarray(data), consts, mds,
                            params.full_rounds, params.partial_rounds, tag)
    return limbs_to_ints(out[None, :])[0]
