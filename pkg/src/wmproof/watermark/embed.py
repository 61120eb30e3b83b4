"""Watermark embedding on top of a logits source.

Each function returns the prompt followed by ``n`` generated tokens. All
sampling randomness comes from ``numpy.random.default_rng(rng_seed)``, one
uniform variate per sampled token, so runs are reproducible.
"""
from __future__ import annotations

import numpy as np

from ..errors import MsgShapeMismatch, PromptTooShort, VocabTooSmall
from .detect import positions_of
from .lm import draw, softmax
from .params import WatermarkParams
from .scores import kgw_green, segment_green, synthid_g, synthid_seeds


def _check_prompt(prompt, params):
    if len(prompt) < params.psi:
        raise PromptTooShort(f"prompt needs at least {params.psi} tokens")
    return [int(t) for t in prompt]


def _biased_generation(prompt, n, lm, rng_seed, delta, green_mask):
    rng = np.random.default_rng(rng_seed)
    y = list(prompt)
    for _ in range(n):
        logits = np.asarray(lm.next_logits(y), dtype=np.float64)
        if delta:
            logits = logits + delta * green_mask(y)
        y.append(draw(softmax(logits), rng.random()))
    return y


def generate(prompt, n, lm, rng_seed) -> list:
    """Unwatermarked sampling with the same randomness layout as the embedders."""
    return _biased_generation([int(t) for t in prompt], n, lm, rng_seed, 0.0, None)


def embed_kgw(prompt, n, params: WatermarkParams, sk: int, lm, rng_seed) -> list:
    prompt = _check_prompt(prompt, params)
    vocab = np.arange(params.vocab_size, dtype=np.int64)
    cache = {}

    def mask(y):
        key = tuple(y[-params.psi:])
        if key not in cache:
            ctx = np.array([key], dtype=np.int64)
            cache[key] = kgw_green(params, sk, ctx, vocab).astype(np.float64)
        return cache[key]

    return _biased_generation(prompt, n, lm, rng_seed, params.delta, mask)


def embed_segment(prompt, n, params: WatermarkParams, sk: int, lm, rng_seed, msg, mapping) -> list:
    prompt = _check_prompt(prompt, params)
    msg = [int(m) for m in msg]
    if len(msg) != params.n_hat or any(not 0 <= m < params.hypotheses for m in msg):
        raise MsgShapeMismatch(f"message must be {params.n_hat} values below {params.hypotheses}")
    positions = positions_of(mapping)
    if positions.shape[0] != params.vocab_size:
        raise ValueError("mapping must cover the whole vocabulary")
    vocab = np.arange(params.vocab_size, dtype=np.int64)
    cache = {}

    def mask(y):
        prev = y[-1]
        if prev not in cache:
            j = msg[int(positions[prev])]
            cache[prev] = segment_green(params, sk, np.array([prev]), vocab, j).astype(np.float64)
        return cache[prev]

    return _biased_generation(prompt, n, lm, rng_seed, params.delta, mask)


def tournament(candidates, g, rng) -> int:
    """Pairwise knockout: level k keeps the member of each pair with larger g_k.

    ``g`` is (depth, K) over the candidate slots; equal scores are settled by
    a fair coin from ``rng``.
    """
    slots = list(range(len(candidates)))
    for k in range(g.shape[0]):
        nxt = []
        for a, b in zip(slots[0::2], slots[1::2]):
            ga, gb = g[k, a], g[k, b]
            if ga > gb:
                nxt.append(a)
            elif gb > ga:
                nxt.append(b)
            else:
                nxt.append(a if rng.random() < 0.5 else b)
        slots = nxt
    return int(candidates[slots[0]])


def embed_synthid(prompt, n, params: WatermarkParams, sk: int, lm, rng_seed) -> list:
    prompt = _check_prompt(prompt, params)
    k_cands = 1 << params.tourney_depth
    if k_cands > params.vocab_size:
        raise VocabTooSmall(f"{k_cands} candidates exceed the vocabulary")
    rng = np.random.default_rng(rng_seed)
    y = list(prompt)
    for _ in range(n):
        probs = softmax(np.asarray(lm.next_logits(y), dtype=np.float64))
        cands = np.array([draw(probs, rng.random()) for _ in range(k_cands)], dtype=np.int64)
        ctx = np.array([y[-params.psi:]], dtype=np.int64)
        seed = synthid_seeds(params, sk, ctx)
        g = synthid_g(params, seed, cands, params.tourney_depth)
        y.append(tournament(cands, g, rng))
    return y


def embed(prompt, n, params: WatermarkParams, sk: int, lm, rng_seed, msg=None, mapping=None) -> list:
    if params.scheme == "kgw":
        return embed_kgw(prompt, n, params, sk, lm, rng_seed)
    if params.scheme == "synthid":
        return embed_synthid(prompt, n, params, sk, lm, rng_seed)
    return embed_segment(prompt, n, params, sk, lm, rng_seed, msg, mapping)
