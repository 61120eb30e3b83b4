"""Gadget catalog: hashes, range checks, comparisons, flags, sums, Merkle paths."""
from __future__ import annotations

from ..errors import ArityUnsupported, RangeTooWide
from ..field import P
from ..hashing.params import mimc_params, poseidon_params
from .system import LC, ONE, ONE_LC, ConstraintSystem, Var

MAX_BITS = 253
COMPACT_TERMS = 16

BITWISE = "bitwise"
BYTE_LOOKUP = "byte_lookup"
MODES = (BITWISE, BYTE_LOOKUP)


# -- hashes -----------------------------------------------------------------

def _pow_chain(cs: ConstraintSystem, u: LC, exponent: int) -> Var:
    """u**exponent with the minimal multiplication chain for 5 or 7."""
    if exponent == 5:
        x2 = cs.mul(u, u)
        x4 = cs.mul(x2, x2)
        return cs.mul(x4, u)
    if exponent == 7:
        x2 = cs.mul(u, u)
        x3 = cs.mul(x2, u)
        x6 = cs.mul(x3, x3)
        return cs.mul(x6, u)
    raise ValueError(f"no chain for exponent {exponent}")


def mimc_permute_lc(cs, x, k) -> LC:
    params = mimc_params()
    x, k = LC.of(x), LC.of(k)
    y = x
    for c in params.round_constants:
        y = _pow_chain(cs, y + k + c, params.exponent).lc()
    return y + k


def mimc_lc(cs, inputs) -> LC:
    h = LC()
    for x in inputs:
        x = LC.of(x)
        h = h + x + mimc_permute_lc(cs, x, h)
    return h


def _compact(cs, lc: LC) -> LC:
    if len(lc) > COMPACT_TERMS:
        return cs.materialize(lc).lc()
    return lc


def poseidon_lc(cs, inputs) -> LC:
    params = poseidon_params(len(inputs) + 1)
    t = params.t
    state = [LC()] + [LC.of(x) for x in inputs]
    for r, rc in enumerate(params.round_constants):
        state = [state[i] + rc[i] for i in range(t)]
        if params.is_full(r):
            state = [_pow_chain(cs, s, params.alpha).lc() for s in state]
        else:
            state[-1] = _pow_chain(cs, state[-1], params.alpha).lc()
        mixed = []
        for i in range(t):
            acc = LC()
            for j in range(t):
                acc = acc + state[j] * params.mds[i][j]
            mixed.append(_compact(cs, acc))
        state = mixed
    return state[1]


def hash_lc(cs: ConstraintSystem, kind: str, inputs) -> LC:
    """Linear combination equal to Hash(inputs) once the rows are satisfied."""
    if len(inputs) not in (2, 3):
        raise ArityUnsupported(f"hash gadget takes 2 or 3 inputs, got {len(inputs)}")
    if kind == "mimc":
        return mimc_lc(cs, inputs)
    if kind == "poseidon":
        return poseidon_lc(cs, inputs)
    raise ValueError(f"unknown hash kind {kind!r}")


def gadget_hash(cs, kind, inputs, output) -> None:
    """Constrain ``output`` to the hash of ``inputs``."""
    cs.enforce_zero(hash_lc(cs, kind, inputs) - output)


# -- range checks -------------------------------------------------------------

def _bits_hint(n, width=1):
    mask = (1 << width) - 1

    def fn(x):
        return tuple((x >> (width * i)) & mask for i in range(n))
    return fn


def range_limbs(cs: ConstraintSystem, n_bits: int, mode: str = BITWISE, lookup: str = "table",
                gate=None, name: str = ""):
    """Allocate limbs whose weighted sum is below 2**n_bits.

    Returns (limb vars, recomposed LC). Bitwise mode allocates one boolean per
    bit; byte_lookup mode allocates 8-bit limbs checked against the byte table,
    either as a recorded lookup (``lookup="table"``) or with the vanishing
    product over [0, 255] spelled out as 255 multiplication rows
    (``lookup="product_chain"``).
    """
    if n_bits > MAX_BITS:
        raise RangeTooWide(f"{n_bits} bits exceed the {MAX_BITS}-bit limit")
    if mode == BITWISE:
        limbs = cs.witnesses(n_bits, name)
        for b in limbs:
            cs.enforce(b, b - ONE_LC, 0)
        width = 1
    elif mode == BYTE_LOOKUP:
        if n_bits % 8:
            raise ValueError("byte_lookup mode needs a multiple of 8 bits")
        limbs = cs.witnesses(n_bits // 8, name)
        for v in limbs:
            if lookup == "table":
                cs.lookup(v, "byte")
            elif lookup == "product_chain":
                _vanishing_product(cs, v)
            else:
                raise ValueError(f"unknown lookup realization {lookup!r}")
        width = 8
    else:
        raise ValueError(f"unknown range mode {mode!r}")
    total = LC()
    for i, v in enumerate(limbs):
        total = total + v * (1 << (width * i))
    return limbs, total, width


def _vanishing_product(cs, v: Var) -> None:
    acc = LC.of(v)
    for k in range(1, 255):
        acc = cs.mul(acc, v - k).lc()
    cs.enforce(acc, v - 255, 0)


def gadget_bit_decompose(cs: ConstraintSystem, x, n_bits: int, mode: str = BITWISE,
                         lookup: str = "table") -> list:
    """Limbs of x (bits or bytes) with x constrained below 2**n_bits."""
    x = LC.of(x)
    limbs, total, width = range_limbs(cs, n_bits, mode, lookup)
    cs.hint(_bits_hint(len(limbs), width), limbs, [x])
    cs.enforce(total, ONE_LC, x)
    return limbs


def _gated_range(cs, x: LC, n_bits: int, gate, mode: str) -> None:
    """gate * (x - sum) = 0 with x's limbs below 2**n_bits; limbs are 0 when gate is 0."""
    limbs, total, width = range_limbs(cs, n_bits, mode)
    gate = LC.of(gate)
    n = len(limbs)
    mask = (1 << width) - 1

    def fn(x_val, g_val):
        if g_val == 0:
            return (0,) * n
        return tuple((x_val >> (width * i)) & mask for i in range(n))

    cs.hint(fn, limbs, [x, gate])
    cs.enforce(gate, total - x, 0)


# -- comparisons ----------------------------------------------------------------

def _compare_width(n_bits: int) -> int:
    if n_bits - 1 > MAX_BITS or n_bits < 2:
        raise RangeTooWide(f"comparison width {n_bits} outside [2, {MAX_BITS + 1}]")
    return n_bits - 1


def gadget_compare(cs, x1, x2, n_bits: int, mode: str = BITWISE, gate=None) -> None:
    """Assert x1 < x2 for operands known to be below 2**(n_bits-1).

    X3 = x1 - x2 + 2**(n_bits-1) must decompose into n_bits-1 bits, which
    happens exactly when x1 < x2. With ``gate`` the final row is multiplied by
    the gate, so the assertion only binds when the gate is 1.
    """
    k = _compare_width(n_bits)
    x3 = LC.of(x1) - LC.of(x2) + (1 << k)
    if gate is None:
        gadget_bit_decompose(cs, x3, k, mode)
    else:
        _gated_range(cs, x3, k, gate, mode)


def gadget_flag(cs, flg: Var, r, threshold, n_bits: int, mode: str = BITWISE) -> None:
    """Constrain boolean flg to [r < threshold] for operands below 2**(n_bits-1).

    Two comparison sub-circuits are allocated: r < t gated by flg and
    t - 1 < r gated by 1 - flg. The branch that is switched off carries an
    all-zero witness.
    """
    r = LC.of(r)
    t = LC.of(threshold)
    cs.enforce(flg, flg - ONE_LC, 0)
    cs.hint(lambda rv, tv: (1 if rv < tv else 0,), [flg], [r, t])
    gadget_compare(cs, r, t, n_bits, mode, gate=flg)
    gadget_compare(cs, t - 1, r, n_bits, mode, gate=ONE_LC - flg)


def is_equal_const(cs, x, c: int) -> Var:
    """Boolean e = [x == c] via an inverse witness."""
    d = LC.of(x) - c
    e = cs.witness()
    inv = cs.witness()

    def fn(dv):
        return (1, 0) if dv == 0 else (0, pow(dv, P - 2, P))

    cs.hint(fn, [e, inv], [d])
    cs.enforce(d, inv, ONE_LC - e)
    cs.enforce(d, e, 0)
    return e


def sign_bit_compare(cs, x, y, n_bits: int, mode: str = BITWISE) -> Var:
    """Boolean s = [x >= y] for x, y below 2**(n_bits-1).

    X3 = x - y + 2**(n_bits-1) lies in [1, 2**n_bits); its top bit is s.
    """
    k = _compare_width(n_bits)
    x3 = LC.of(x) - LC.of(y) + (1 << k)
    limbs, low, width = range_limbs(cs, k, mode)
    s = cs.witness()
    cs.enforce(s, s - ONE_LC, 0)
    n = len(limbs)
    mask = (1 << width) - 1

    def fn(v):
        return tuple((v >> (width * i)) & mask for i in range(n)) + (v >> k,)

    cs.hint(fn, limbs + [s], [x3])
    cs.enforce(low + s * (1 << k), ONE_LC, x3)
    return s


SPLIT = 248
P_HI, P_LO = divmod(P, 1 << SPLIT)


def field_flag(cs, r, threshold: int, mode: str = BITWISE) -> LC:
    """Boolean LC equal to [r < threshold] for any field element r.

    r is written canonically as hi * 2**248 + lo with lo < 2**248, hi < 2**8
    and hi * 2**248 + lo < P. One signed comparison of lo against a constant
    chosen by hi serves both the canonicity check (hi == P_HI needs lo < P_LO)
    and the threshold check (hi == t_hi decides on lo < t_lo).
    """
    t_hi, t_lo = divmod(threshold, 1 << SPLIT)
    if not 0 < threshold < P:
        raise ValueError("threshold must be a nonzero field element")
    r = LC.of(r)
    lo_limbs, lo, w_lo = range_limbs(cs, SPLIT, mode)
    hi_limbs, hi, w_hi = range_limbs(cs, 8, mode)
    n_lo, n_hi = len(lo_limbs), len(hi_limbs)

    def split(v):
        h, l_ = divmod(v, 1 << SPLIT)
        return (tuple((l_ >> (w_lo * i)) & ((1 << w_lo) - 1) for i in range(n_lo))
                + tuple((h >> (w_hi * i)) & ((1 << w_hi) - 1) for i in range(n_hi)))

    cs.hint(split, lo_limbs + hi_limbs, [r])
    cs.enforce(hi * (1 << SPLIT) + lo, ONE_LC, r)
    # hi <= P_HI
    gadget_compare(cs, hi, P_HI + 1, 9, mode)
    e_p = is_equal_const(cs, hi, P_HI)
    if t_hi == P_HI:
        raise ValueError("threshold too close to the modulus for this split")
    e_t = is_equal_const(cs, hi, t_hi)
    bound = e_p * P_LO + e_t * t_lo
    s = sign_bit_compare(cs, lo, bound, SPLIT + 1, mode)   # s = [lo >= bound]
    cs.enforce(e_p, s, 0)                                    # canonical when hi == P_HI
    below_hi = ONE_LC - sign_bit_compare(cs, hi, t_hi, 9, mode)  # [hi < t_hi]
    tie = cs.mul(e_t, ONE_LC - s)                            # hi == t_hi and lo < t_lo
    return below_hi + tie


def gadget_sum(cs, terms, out) -> None:
    total = LC()
    for t in terms:
        total = total + LC.of(t)
    cs.enforce(total, ONE_LC, out)


# -- Merkle membership -----------------------------------------------------------

def gadget_merkle(cs, y, pos, sk, siblings, bits, root, kind: str = "poseidon", gate=None) -> None:
    """Membership of leaf Hash(y, pos, sk) under ``root``.

    A path bit of 1 keeps the running node on the left. The bits are also tied
    to the leaf index y so that each token can only open its own leaf. With
    ``gate`` the root and index rows are multiplied by it.
    """
    h = hash_lc(cs, kind, [y, pos, sk])
    index = LC()
    for i, (sib, bit) in enumerate(zip(siblings, bits)):
        cs.enforce(bit, LC.of(bit) - ONE_LC, 0)
        sib = LC.of(sib)
        m = cs.mul(bit, h - sib)
        left = sib + m
        right = h - m
        h = hash_lc(cs, kind, [left, right])
        index = index + (ONE_LC - bit) * (1 << i)
    if gate is None:
        cs.enforce_zero(h - root)
        cs.enforce_zero(index - y)
    else:
        cs.enforce(gate, h - root, 0)
        cs.enforce(gate, index - y, 0)
