"""Scheme configuration, key material and detection reports."""
from __future__ import annotations

import secrets
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from ..errors import FusionUnavailable, OddContextWidth
from ..field import P
from ..hashing import KINDS, poseidon_hash

SCHEMES = ("kgw", "synthid", "segment")


def threshold_for(gamma: float) -> int:
    """floor(gamma * P), with gamma read as the decimal it prints as."""
    frac = Fraction(repr(float(gamma)))
    return (frac.numerator * P) // frac.denominator


G_THRESHOLD = P // 2


@dataclass(frozen=True)
class WatermarkParams:
    scheme: str = "kgw"
    gamma: float = 0.25
    psi: int = 1
    delta: float = 2.0
    xi: int = 30
    tourney_depth: int = 4
    n_hat: int = 6
    m_hat: int = 4
    vocab_size: int = 50265
    hash_kind: str = "poseidon"
    fused: bool = True

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.hash_kind not in KINDS:
            raise ValueError(f"unknown hash kind {self.hash_kind!r}")
        if self.psi < 1:
            raise ValueError("context width must be at least 1")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if self.gamma * self.vocab_size < 1:
            raise ValueError("gamma * vocab_size must be at least 1")
        if self.scheme == "synthid":
            if self.psi % 2:
                raise OddContextWidth("synthid context width must be even")
            if self.xi < 1 or self.tourney_depth < 1:
                raise ValueError("xi and tourney_depth must be positive")
        if self.scheme == "kgw" and self.fused and self.psi != 1:
            raise FusionUnavailable("the fused three-input seed needs psi = 1")
        if self.scheme == "segment":
            if self.psi != 1:
                raise ValueError("segment scheme is defined for psi = 1")
            if self.n_hat < 1 or self.m_hat < 1:
                raise ValueError("n_hat and m_hat must be positive")

    @property
    def threshold_green(self) -> int:
        return threshold_for(self.gamma)

    @property
    def threshold_g(self) -> int:
        return G_THRESHOLD

    @property
    def hypotheses(self) -> int:
        return 1 << self.m_hat

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "WatermarkParams":
        return cls(**d)


def kgw_params(**kw) -> WatermarkParams:
    return WatermarkParams(**{"scheme": "kgw", "gamma": 0.25, "psi": 1, **kw})


def synthid_params(**kw) -> WatermarkParams:
    return WatermarkParams(**{"scheme": "synthid", "psi": 4, "xi": 30, "tourney_depth": 4,
                              "fused": False, **kw})


def segment_params(**kw) -> WatermarkParams:
    return WatermarkParams(**{"scheme": "segment", "gamma": 0.5, "psi": 1, "n_hat": 6,
                              "m_hat": 4, "fused": False, **kw})


@dataclass(frozen=True)
class SecretKey:
    sk: int
    s_h: int

    def __post_init__(self):
        if not 0 < self.sk < P:
            raise ValueError("sk must be a nonzero field element")
        if not 0 <= self.s_h < P:
            raise ValueError("s_H must be a field element")


def keygen(rng=None) -> SecretKey:
    """Fresh key from the OS CSPRNG, or from ``rng`` (a random.Random) for tests."""
    draw = (lambda: secrets.randbelow(P - 1) + 1) if rng is None else (lambda: rng.randrange(1, P))
    return SecretKey(draw(), draw())


def commit(sk: int) -> int:
    """Key commitment published before any dispute: Poseidon(sk, 0)."""
    return poseidon_hash([sk, 0])


@dataclass
class DetectionReport:
    scheme: str
    n_scored: int
    score: float
    green_count: int = 0
    s_g: int = 0
    count: list = field(default_factory=list)
    decoded_msg: list = field(default_factory=list)

    def claimed(self):
        """The quantity a proof attests to."""
        if self.scheme == "kgw":
            return self.green_count
        if self.scheme == "synthid":
            return self.s_g
        return [list(row) for row in self.count]

    def to_dict(self) -> dict:
        return {"scheme": self.scheme, "n_scored": self.n_scored, "score": float(self.score),
                "green_count": self.green_count, "s_g": self.s_g,
                "count": [list(map(int, r)) for r in self.count], "decoded_msg": list(map(int, self.decoded_msg))}
