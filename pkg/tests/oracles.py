"""Scalar brute-force recounts used as independent oracles.

These walk the text one token at a time through the pure-Python reference
hashes, never touching the numba batch kernels the package uses for detection.
"""
from fractions import Fraction

from wmproof.field import P
from wmproof.hashing import mimc_hash, poseidon_hash

H = {"mimc": mimc_hash, "poseidon": poseidon_hash}


def green_threshold(gamma):
    return int(Fraction(repr(gamma)) * P)


def kgw_count(tokens, params, sk):
    h = H[params.hash_kind]
    thr = green_threshold(params.gamma)
    n = 0
    for i in range(params.psi, len(tokens)):
        ctx = tokens[i - params.psi:i]
        if params.fused:
            g = h([sk, ctx[-1], tokens[i]])
        else:
            sd = h([sk, ctx[0]])
            for c in ctx[1:]:
                sd = h([sd, c])
            g = h([sd, tokens[i]])
        n += g < thr
    return n


def synthid_sum(tokens, params, sk):
    h = H[params.hash_kind]
    total = 0
    for i in range(params.psi, len(tokens)):
        ctx = tokens[i - params.psi:i]
        sd = sk
        for a, b in zip(ctx[0::2], ctx[1::2]):
            sd = h([sd, a, b])
        total += sum(h([sd, tokens[i], k]) < P // 2 for k in range(1, params.xi + 1))
    return total


def segment_counts(tokens, params, sk, positions):
    h = H[params.hash_kind]
    thr = green_threshold(params.gamma)
    count = [[0] * (1 << params.m_hat) for _ in range(params.n_hat)]
    for i in range(1, len(tokens)):
        prev, cur = tokens[i - 1], tokens[i]
        for j in range(1 << params.m_hat):
            count[positions[prev]][j] += h([h([sk, prev, j]), cur]) < thr
    return count
