"""Numba batch kernels for MiMC and Poseidon.

Field elements are four little-endian uint64 limbs. Inside the kernels values
live in Montgomery form (R = 2^256) and are kept below 2P between steps;
outputs are converted back to canonical form before they leave.
"""
from __future__ import annotations

import numba
import numpy as np
from llvmlite import ir
from numba import njit, prange, types
from numba.extending import intrinsic

from ..field import P

# TBB in this environment is too old for numba; the work-queue layer is fine.
if numba.config.THREADING_LAYER == "default":
    numba.config.THREADING_LAYER = "workqueue"

MASK64 = (1 << 64) - 1
R = (1 << 256) % P
R2 = R * R % P


def int_to_limbs(v: int) -> np.ndarray:
    return np.array([(v >> (64 * i)) & MASK64 for i in range(4)], dtype=np.uint64)


_N = int_to_limbs(P)
N0, N1, N2, N3 = (np.uint64(x) for x in _N)
NINV = np.uint64((-pow(P, -1, 1 << 64)) % (1 << 64))
_P2 = int_to_limbs(2 * P)
P2_0, P2_1, P2_2, P2_3 = (np.uint64(x) for x in _P2)
_P4 = int_to_limbs(4 * P)
P4_0, P4_1, P4_2, P4_3 = (np.uint64(x) for x in _P4)
_R2 = int_to_limbs(R2)
R2_0, R2_1, R2_2, R2_3 = (np.uint64(x) for x in _R2)
Z = np.uint64(0)
ONE = np.uint64(1)
# P / 2^192 as a float, used to estimate quotients in the small-matrix layer
PF = float(P) / float(1 << 192)
INV_PF = 1.0 / PF


@intrinsic
def _mac(typingctx, a, b, c, d):
    """(lo, hi) of a*b + c + d computed in 128 bits."""
    sig = types.UniTuple(types.uint64, 2)(types.uint64, types.uint64, types.uint64, types.uint64)

    def codegen(context, builder, signature, args):
        a, b, c, d = args
        i128 = ir.IntType(128)
        i64 = ir.IntType(64)
        r = builder.mul(builder.zext(a, i128), builder.zext(b, i128))
        r = builder.add(r, builder.zext(c, i128))
        r = builder.add(r, builder.zext(d, i128))
        lo = builder.trunc(r, i64)
        hi = builder.trunc(builder.lshr(r, ir.Constant(i128, 64)), i64)
        return context.make_tuple(builder, signature.return_type, (lo, hi))

    return sig, codegen


@intrinsic
def _sbb(typingctx, a, b, borrow):
    """(a - b - borrow mod 2^64, borrow_out)."""
    sig = types.UniTuple(types.uint64, 2)(types.uint64, types.uint64, types.uint64)

    def codegen(context, builder, signature, args):
        a, b, br = args
        i128 = ir.IntType(128)
        i64 = ir.IntType(64)
        r = builder.sub(builder.zext(a, i128), builder.zext(b, i128))
        r = builder.sub(r, builder.zext(br, i128))
        lo = builder.trunc(r, i64)
        out = builder.trunc(builder.lshr(r, ir.Constant(i128, 127)), i64)
        return context.make_tuple(builder, signature.return_type, (lo, out))

    return sig, codegen


@njit(inline="always")
def _add(a0, a1, a2, a3, b0, b1, b2, b3):
    r0, c = _mac(a0, ONE, b0, Z)
    r1, c = _mac(a1, ONE, b1, c)
    r2, c = _mac(a2, ONE, b2, c)
    r3, c = _mac(a3, ONE, b3, c)
    return r0, r1, r2, r3


@njit(inline="always")
def _ge(a0, a1, a2, a3, b0, b1, b2, b3):
    if a3 != b3:
        return a3 > b3
    if a2 != b2:
        return a2 > b2
    if a1 != b1:
        return a1 > b1
    return a0 >= b0


@njit(inline="always")
def _sub(a0, a1, a2, a3, b0, b1, b2, b3):
    r0, br = _sbb(a0, b0, Z)
    r1, br = _sbb(a1, b1, br)
    r2, br = _sbb(a2, b2, br)
    r3, br = _sbb(a3, b3, br)
    return r0, r1, r2, r3


@njit(inline="always")
def _reduce2p(a0, a1, a2, a3):
    """Bring a value below 5P under 2P."""
    if _ge(a0, a1, a2, a3, P4_0, P4_1, P4_2, P4_3):
        a0, a1, a2, a3 = _sub(a0, a1, a2, a3, P4_0, P4_1, P4_2, P4_3)
    if _ge(a0, a1, a2, a3, P2_0, P2_1, P2_2, P2_3):
        a0, a1, a2, a3 = _sub(a0, a1, a2, a3, P2_0, P2_1, P2_2, P2_3)
    return a0, a1, a2, a3


@njit(inline="always")
def _mont_mul(a0, a1, a2, a3, b0, b1, b2, b3):
    # CIOS without the final subtraction: inputs below 2P give outputs below 2P
    # because 4P < 2^256.
    t0 = t1 = t2 = t3 = Z
    for bi in (b0, b1, b2, b3):
        t0, c = _mac(a0, bi, t0, Z)
        t1, c = _mac(a1, bi, t1, c)
        t2, c = _mac(a2, bi, t2, c)
        t3, A = _mac(a3, bi, t3, c)
        m = t0 * NINV
        _, c = _mac(m, N0, t0, Z)
        t0, c = _mac(m, N1, t1, c)
        t1, c = _mac(m, N2, t2, c)
        t2, c = _mac(m, N3, t3, c)
        t3 = A + c
    return t0, t1, t2, t3


@njit(inline="always")
def _to_mont(a0, a1, a2, a3):
    return _mont_mul(a0, a1, a2, a3, R2_0, R2_1, R2_2, R2_3)


@njit(inline="always")
def _from_mont(a0, a1, a2, a3):
    a0, a1, a2, a3 = _mont_mul(a0, a1, a2, a3, ONE, Z, Z, Z)
    if _ge(a0, a1, a2, a3, N0, N1, N2, N3):
        a0, a1, a2, a3 = _sub(a0, a1, a2, a3, N0, N1, N2, N3)
    return a0, a1, a2, a3


@njit(inline="always")
def _pow7(x0, x1, x2, x3):
    s0, s1, s2, s3 = _mont_mul(x0, x1, x2, x3, x0, x1, x2, x3)
    c0, c1, c2, c3 = _mont_mul(s0, s1, s2, s3, x0, x1, x2, x3)
    s0, s1, s2, s3 = _mont_mul(c0, c1, c2, c3, c0, c1, c2, c3)
    return _mont_mul(s0, s1, s2, s3, x0, x1, x2, x3)


@njit(inline="always")
def _pow5(x0, x1, x2, x3):
    s0, s1, s2, s3 = _mont_mul(x0, x1, x2, x3, x0, x1, x2, x3)
    s0, s1, s2, s3 = _mont_mul(s0, s1, s2, s3, s0, s1, s2, s3)
    return _mont_mul(s0, s1, s2, s3, x0, x1, x2, x3)


@njit(cache=True)
def _selftest_mul(a, b):
    x = _to_mont(a[0], a[1], a[2], a[3])
    y = _to_mont(b[0], b[1], b[2], b[3])
    r = _mont_mul(x[0], x[1], x[2], x[3], y[0], y[1], y[2], y[3])
    r = _from_mont(r[0], r[1], r[2], r[3])
    return np.array([r[0], r[1], r[2], r[3]], dtype=np.uint64)


@njit(cache=True, parallel=True)
def mimc_chain(h0, cols, consts):
    """Miyaguchi-Preneel MiMC over the columns of ``cols`` starting from state h0.

    h0: (4,) Montgomery limbs of the initial chaining value.
    cols: (k, n, 4) canonical limbs; consts: (rounds, 4) Montgomery limbs.
    Returns (n, 4) canonical limbs.
    """
    k = cols.shape[0]
    n = cols.shape[1]
    rounds = consts.shape[0]
    out = np.empty((n, 4), dtype=np.uint64)
    for i in prange(n):
        h0_, h1_, h2_, h3_ = h0[0], h0[1], h0[2], h0[3]
        for j in range(k):
            x0, x1, x2, x3 = _to_mont(cols[j, i, 0], cols[j, i, 1], cols[j, i, 2], cols[j, i, 3])
            y0, y1, y2, y3 = x0, x1, x2, x3
            for r in range(rounds):
                y0, y1, y2, y3 = _add(y0, y1, y2, y3, h0_, h1_, h2_, h3_)
                y0, y1, y2, y3 = _add(y0, y1, y2, y3, consts[r, 0], consts[r, 1], consts[r, 2], consts[r, 3])
                y0, y1, y2, y3 = _reduce2p(y0, y1, y2, y3)
                y0, y1, y2, y3 = _pow7(y0, y1, y2, y3)
            # h' = h + x + (y + h)
            y0, y1, y2, y3 = _add(y0, y1, y2, y3, h0_, h1_, h2_, h3_)
            y0, y1, y2, y3 = _reduce2p(y0, y1, y2, y3)
            y0, y1, y2, y3 = _add(y0, y1, y2, y3, h0_, h1_, h2_, h3_)
            y0, y1, y2, y3 = _reduce2p(y0, y1, y2, y3)
            y0, y1, y2, y3 = _add(y0, y1, y2, y3, x0, x1, x2, x3)
            h0_, h1_, h2_, h3_ = _reduce2p(y0, y1, y2, y3)
        r0, r1, r2, r3 = _from_mont(h0_, h1_, h2_, h3_)
        out[i, 0] = r0
        out[i, 1] = r1
        out[i, 2] = r2
        out[i, 3] = r3
    return out


@njit(inline="always")
def _small_mix(s, mds, t, out):
    """out = mds @ s with small non-negative integer entries; s rows below 2P."""
    for i in range(t):
        a0 = a1 = a2 = a3 = a4 = Z
        for j in range(t):
            m = np.uint64(mds[i, j])
            lo, c0 = _mac(s[j, 0], m, a0, Z)
            a0 = lo
            lo, c1 = _mac(s[j, 1], m, a1, c0)
            a1 = lo
            lo, c2 = _mac(s[j, 2], m, a2, c1)
            a2 = lo
            lo, c3 = _mac(s[j, 3], m, a3, c2)
            a3 = lo
            a4 = a4 + c3
        # quotient estimate from the top 128 bits, biased low so the
        # subtraction never underflows
        est = (float(a4) * 18446744073709551616.0 + float(a3)) * INV_PF
        q = np.uint64(0)
        if est > 2.0:
            q = np.uint64(est) - np.uint64(2)
        lo, c = _mac(q, N0, Z, Z)
        a0, br = _sbb(a0, lo, Z)
        lo, c = _mac(q, N1, c, Z)
        a1, br = _sbb(a1, lo, br)
        lo, c = _mac(q, N2, c, Z)
        a2, br = _sbb(a2, lo, br)
        lo, c = _mac(q, N3, c, Z)
        a3, br = _sbb(a3, lo, br)
        # remainder is below 4P here
        if _ge(a0, a1, a2, a3, P2_0, P2_1, P2_2, P2_3):
            a0, a1, a2, a3 = _sub(a0, a1, a2, a3, P2_0, P2_1, P2_2, P2_3)
        out[i, 0] = a0
        out[i, 1] = a1
        out[i, 2] = a2
        out[i, 3] = a3


@njit(cache=True, parallel=True)
def poseidon_perm_first(cols, consts, mds, full_rounds, partial_rounds):
    """Poseidon over states [0, cols...]; returns state[1] as canonical limbs.

    cols: (t-1, n, 4) canonical limbs; consts: (rounds, t, 4) Montgomery limbs;
    mds: (t, t) small integers.
    """
    tm1 = cols.shape[0]
    t = tm1 + 1
    n = cols.shape[1]
    half = full_rounds // 2
    rounds = full_rounds + partial_rounds
    out = np.empty((n, 4), dtype=np.uint64)
    block = 256
    for b in prange((n + block - 1) // block):
        s = np.zeros((t, 4), dtype=np.uint64)
        tmp = np.empty((t, 4), dtype=np.uint64)
        for i in range(b * block, min(n, (b + 1) * block)):
            for l in range(4):
                s[0, l] = Z
            for j in range(tm1):
                x0, x1, x2, x3 = _to_mont(cols[j, i, 0], cols[j, i, 1], cols[j, i, 2], cols[j, i, 3])
                s[j + 1, 0] = x0
                s[j + 1, 1] = x1
                s[j + 1, 2] = x2
                s[j + 1, 3] = x3
            for r in range(rounds):
                full = r < half or r >= half + partial_rounds
                for j in range(t):
                    y0, y1, y2, y3 = _add(s[j, 0], s[j, 1], s[j, 2], s[j, 3],
                                          consts[r, j, 0], consts[r, j, 1], consts[r, j, 2], consts[r, j, 3])
                    y0, y1, y2, y3 = _reduce2p(y0, y1, y2, y3)
                    if full or j == t - 1:
                        y0, y1, y2, y3 = _pow5(y0, y1, y2, y3)
                    s[j, 0] = y0
                    s[j, 1] = y1
                    s[j, 2] = y2
                    s[j, 3] = y3
                _small_mix(s, mds, t, tmp)
                for j in range(t):
                    for l in range(4):
                        s[j, l] = tmp[j, l]
            r0, r1, r2, r3 = _from_mont(s[1, 0], s[1, 1], s[1, 2], s[1, 3])
            out[i, 0] = r0
            out[i, 1] = r1
            out[i, 2] = r2
            out[i, 3] = r3
    return out


@njit(cache=True)
def poseidon_sponge(data, consts, mds, full_rounds, partial_rounds, tag):
    """Sequential sponge: capacity starts at ``tag`` (Montgomery), rate t-1.

    data: (n, 4) canonical limbs. Each block adds t-1 inputs into the rate
    lanes and permutes; a short final block is zero padded. Returns state[1]
    in canonical limbs.
    """
    t = mds.shape[0]
    rate = t - 1
    half = full_rounds // 2
    rounds = full_rounds + partial_rounds
    n = data.shape[0]
    s = np.zeros((t, 4), dtype=np.uint64)
    tmp = np.empty((t, 4), dtype=np.uint64)
    for l in range(4):
        s[0, l] = tag[l]
    nblocks = (n + rate - 1) // rate
    if nblocks == 0:
        nblocks = 1
    for blk in range(nblocks):
        for j in range(rate):
            idx = blk * rate + j
            if idx < n:
                x0, x1, x2, x3 = _to_mont(data[idx, 0], data[idx, 1], data[idx, 2], data[idx, 3])
                y0, y1, y2, y3 = _add(s[j + 1, 0], s[j + 1, 1], s[j + 1, 2], s[j + 1, 3], x0, x1, x2, x3)
                y0, y1, y2, y3 = _reduce2p(y0, y1, y2, y3)
                s[j + 1, 0] = y0
                s[j + 1, 1] = y1
                s[j + 1, 2] = y2
                s[j + 1, 3] = y3
        for r in range(rounds):
            full = r < half or r >= half + partial_rounds
            for j in range(t):
                y0, y1, y2, y3 = _add(s[j, 0], s[j, 1], s[j, 2], s[j, 3],
                                      consts[r, j, 0], consts[r, j, 1], consts[r, j, 2], consts[r, j, 3])
                y0, y1, y2, y3 = _reduce2p(y0, y1, y2, y3)
                if full or j == t - 1:
                    y0, y1, y2, y3 = _pow5(y0, y1, y2, y3)
                s[j, 0] = y0
                s[j, 1] = y1
                s[j, 2] = y2
                s[j, 3] = y3
            _small_mix(s, mds, t, tmp)
            for j in range(t):
                for l in range(4):
                    s[j, l] = tmp[j, l]
    r0, r1, r2, r3 = _from_mont(s[1, 0], s[1, 1], s[1, 2], s[1, 3])
    return np.array([r0, r1, r2, r3], dtype=np.uint64)
