"""Watermark detection for the three schemes."""
from __future__ import annotations

import math

import numpy as np

from ..errors import TextTooShort
from .params import DetectionReport, WatermarkParams
from .scores import kgw_green, segment_green, synthid_g, synthid_seeds


def _windows(tokens, psi: int):
    arr = np.asarray(tokens, dtype=np.int64)
    if arr.shape[0] <= psi:
        raise TextTooShort(f"need more than {psi} tokens, got {arr.shape[0]}")
    n = arr.shape[0] - psi
    ctx = np.stack([arr[c:c + n] for c in range(psi)], axis=1)
    return ctx, arr[psi:]


def z_score(count: int, n: int, gamma: float) -> float:
    return (count - gamma * n) / math.sqrt(n * gamma * (1 - gamma))


def report_from_claimed(params: WatermarkParams, claimed, n: int) -> DetectionReport:
    """Score (and decoded message) from the proven statistic alone."""
    if params.scheme == "kgw":
        return DetectionReport("kgw", n, z_score(claimed, n, params.gamma), green_count=int(claimed))
    if params.scheme == "synthid":
        return DetectionReport("synthid", n, claimed / (n * params.xi), s_g=int(claimed))
    count = np.asarray(claimed, dtype=np.int64)
    decoded = count.argmax(axis=1)  # first maximum, i.e. smallest j on ties
    best = int(count.max(axis=1).sum())
    return DetectionReport("segment", n, z_score(best, n, params.gamma),
                           count=count.tolist(), decoded_msg=[int(v) for v in decoded])


def detect_kgw(tokens, params: WatermarkParams, sk: int) -> DetectionReport:
    ctx, cur = _windows(tokens, params.psi)
    return report_from_claimed(params, int(kgw_green(params, sk, ctx, cur).sum()), cur.shape[0])


def detect_synthid(tokens, params: WatermarkParams, sk: int) -> DetectionReport:
    ctx, cur = _windows(tokens, params.psi)
    g = synthid_g(params, synthid_seeds(params, sk, ctx), cur, params.xi)
    return report_from_claimed(params, int(g.sum()), cur.shape[0])


def positions_of(mapping) -> np.ndarray:
    return np.asarray(getattr(mapping, "positions", mapping), dtype=np.int64)


def detect_segment(tokens, params: WatermarkParams, sk: int, mapping) -> DetectionReport:
    ctx, cur = _windows(tokens, params.psi)
    prev = ctx[:, -1]
    pos = positions_of(mapping)[prev]
    count = np.zeros((params.n_hat, params.hypotheses), dtype=np.int64)
    for j in range(params.hypotheses):
        green = segment_green(params, sk, prev, cur, j).astype(np.int64)
        np.add.at(count[:, j], pos, green)
    return report_from_claimed(params, count.tolist(), cur.shape[0])


def detect(tokens, params: WatermarkParams, sk: int, mapping=None) -> DetectionReport:
    if params.scheme == "kgw":
        return detect_kgw(tokens, params, sk)
    if params.scheme == "synthid":
        return detect_synthid(tokens, params, sk)
    if mapping is None:
        raise ValueError("segment detection needs the token-position mapping")
    return detect_segment(tokens, params, sk, mapping)
