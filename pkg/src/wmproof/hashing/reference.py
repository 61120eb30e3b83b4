"""Scalar reference implementations of MiMC and Poseidon over plain ints.

These are the definitions every other route (batch kernels, circuits) is
checked against.
"""
from __future__ import annotations

from ..errors import ArityUnsupported
from ..field import P
from .params import MimcParams, PoseidonParams, mimc_params, poseidon_params


def mimc_permute(x: int, k: int, params: MimcParams | None = None) -> int:
    """Keyed permutation E_k(x): ``y <- (y + k + C_i)^e`` for each round, then ``+ k``."""
    params = params or mimc_params()
    e = params.exponent
    y = x % P
    for c in params.round_constants:
        y = pow((y + k + c) % P, e, P)
    return (y + k) % P


def mimc_absorb(h: int, x: int, params: MimcParams | None = None) -> int:
    """One Miyaguchi-Preneel step: ``h' = h + x + E_h(x)``."""
    return (h + x + mimc_permute(x, h, params)) % P


def mimc_hash(inputs, params: MimcParams | None = None) -> int:
    if len(inputs) not in (2, 3):
        raise ArityUnsupported(f"MiMC supports 2 or 3 inputs, got {len(inputs)}")
    params = params or mimc_params()
    h = 0
    for x in inputs:
        h = mimc_absorb(h, int(x) % P, params)
    return h


def poseidon_permute(state, params: PoseidonParams) -> list:
    t = params.t
    a = params.alpha
    mds = params.mds
    s = [v % P for v in state]
    for r, rc in enumerate(params.round_constants):
        s = [(s[i] + rc[i]) % P for i in range(t)]
        if params.is_full(r):
            s = [pow(v, a, P) for v in s]
        else:
            s[-1] = pow(s[-1], a, P)
        s = [sum(mds[i][j] * s[j] for j in range(t)) % P for i in range(t)]
    return s


def poseidon_hash(inputs, params: PoseidonParams | None = None) -> int:
    n = len(inputs)
    if n not in (2, 3):
        raise ArityUnsupported(f"Poseidon supports 2 or 3 inputs, got {n}")
    params = params or poseidon_params(n + 1)
    if params.t != n + 1:
        raise ArityUnsupported(f"width {params.t} does not match {n} inputs")
    state = [0] + [int(x) % P for x in inputs]
    return poseidon_permute(state, params)[1]


def poseidon_sponge(values, t: int = 4) -> int:
    """Scalar sponge matching the batch digest: capacity = len, rate t - 1."""
    params = poseidon_params(t)
    rate = t - 1
    vals = [int(v) % P for v in values]
    state = [len(vals) % P] + [0] * rate
    blocks = max(1, -(-len(vals) // rate))
    for b in range(blocks):
        chunk = vals[b * rate:(b + 1) * rate]
        for j, v in enumerate(chunk):
            state[j + 1] = (state[j + 1] + v) % P
        state = poseidon_permute(state, params)
    return state[1]
