"""ZK-friendly hashes used as keyed PRFs, plus batch and statistics helpers."""
from .params import MimcParams, PoseidonParams, mimc_params, poseidon_params
from .reference import mimc_hash, mimc_permute, poseidon_hash, poseidon_permute

KINDS = ("mimc", "poseidon")


def prf(kind: str, inputs) -> int:
    """Keyed PRF: the hash of ``kind`` over 2 or 3 field elements."""
    if kind == "mimc":
        return mimc_hash(inputs)
    if kind == "poseidon":
        return poseidon_hash(inputs)
    raise ValueError(f"unknown hash kind {kind!r}")


__all__ = [
    "KINDS", "MimcParams", "PoseidonParams", "mimc_params", "poseidon_params",
    "mimc_hash", "mimc_permute", "poseidon_hash", "poseidon_permute", "prf",
]
