"""Deterministic parameter generation for MiMC and Poseidon."""
from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import gcd

from ..field import P

MIMC_SEED = b"wmproof.mimc.x7"
POSEIDON_SEED = "wmproof.poseidon"


@dataclass(frozen=True)
class MimcParams:
    rounds: int
    exponent: int
    round_constants: tuple

    def __post_init__(self):
        if gcd(self.exponent, P - 1) != 1:
            raise ValueError("exponent does not give a permutation")
        if len(self.round_constants) != self.rounds or self.round_constants[0] != 0:
            raise ValueError("need one constant per round with C_0 = 0")


@dataclass(frozen=True)
class PoseidonParams:
    t: int
    full_rounds: int
    partial_rounds: int
    alpha: int
    mds: tuple            # t rows of t small ints
    round_constants: tuple  # (full_rounds + partial_rounds) rows of t ints

    @property
    def rounds(self) -> int:
        return self.full_rounds + self.partial_rounds

    def is_full(self, r: int) -> bool:
        half = self.full_rounds // 2
        return r < half or r >= half + self.partial_rounds


@lru_cache(maxsize=None)
def mimc_params(rounds: int = 91, exponent: int = 7, seed: bytes = MIMC_SEED) -> MimcParams:
    consts = [0]
    c = hashlib.sha3_256(seed).digest()
    for _ in range(rounds - 1):
        c = hashlib.sha3_256(c).digest()
        consts.append(int.from_bytes(c, "big") % P)
    return MimcParams(rounds, exponent, tuple(consts))


def _det(m) -> int:
    """Integer determinant by Laplace expansion (matrices here are at most 4x4)."""
    n = len(m)
    if n == 1:
        return m[0][0]
    total = 0
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        total += (-1) ** j * m[0][j] * _det(minor)
    return total


def all_minors_nonzero(m) -> bool:
    """True when every square submatrix is nonsingular mod P (the MDS property)."""
    n = len(m)
    for k in range(1, n + 1):
        for rows in itertools.combinations(range(n), k):
            for cols in itertools.combinations(range(n), k):
                sub = [[m[r][c] for c in cols] for r in rows]
                if _det(sub) % P == 0:
                    return False
    return True


_ROUNDS = {3: (8, 57), 4: (8, 56)}


@lru_cache(maxsize=None)
def poseidon_params(t: int, full_rounds: int | None = None, partial_rounds: int | None = None,
                    alpha: int = 5) -> PoseidonParams:
    if full_rounds is None or partial_rounds is None:
        if t not in _ROUNDS:
            raise ValueError(f"no default round numbers for width {t}")
        full_rounds, partial_rounds = _ROUNDS[t]
    domain = f"{POSEIDON_SEED}.t{t}.rf{full_rounds}.rp{partial_rounds}".encode()
    n_consts = t * (full_rounds + partial_rounds)
    stream = hashlib.shake_256(domain + b".arc").digest(64 * n_consts)
    flat = [int.from_bytes(stream[64 * i:64 * i + 64], "big") % P for i in range(n_consts)]
    rc = tuple(tuple(flat[r * t:(r + 1) * t]) for r in range(full_rounds + partial_rounds))
    # Small-entry MDS matrix: pseudorandom entries in [1, 256), retried until
    # every square minor is nonzero.
    for attempt in itertools.count():
        raw = hashlib.shake_256(domain + b".mds.%d" % attempt).digest(4 * t * t)
        vals = [b for b in raw if b != 0][: t * t]
        if len(vals) < t * t:
            continue
        m = [vals[i * t:(i + 1) * t] for i in range(t)]
        if all_minors_nonzero(m):
            break
    mds = tuple(tuple(row) for row in m)
    return PoseidonParams(t, full_rounds, partial_rounds, alpha, mds, rc)
