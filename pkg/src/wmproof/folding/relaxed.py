"""Folding of relaxed R1CS instances and Fiat-Shamir challenges.

Two instances ``(Z1, mu1, E1)`` and ``(Z2, mu2, E2)`` over the same system
fold with challenge r into

    Z = Z1 + r Z2,   mu = mu1 + r mu2,   E = E1 + r T + r^2 E2,

where ``T = AZ1*BZ2 + AZ2*BZ1 - mu1 CZ2 - mu2 CZ1`` is the cross term.
Witnesses travel with the instances (no commitments), so a verifier can redo
every step.
"""
from __future__ import annotations

from ..errors import FoldingUnsupported, ShapeMismatch
from ..field import P
from ..hashing import poseidon_hash
from ..hashing.batch import sponge_digest
from ..r1cs.system import ConstraintSystem, RelaxedInstance


def _same_shape(cs: ConstraintSystem, *insts):
    for inst in insts:
        if (len(inst.public) != cs.num_public or len(inst.witness) != cs.num_witness
                or len(inst.err) != cs.num_rows):
            raise ShapeMismatch("instance shape does not match the constraint system")


def products(cs: ConstraintSystem, inst: RelaxedInstance):
    return cs.products(inst.z())


def compute_cross_term(cs: ConstraintSystem, inst1: RelaxedInstance, inst2: RelaxedInstance,
                       prods1=None, prods2=None) -> list:
    _same_shape(cs, inst1, inst2)
    if cs.lookups:
        raise FoldingUnsupported("table lookups cannot be folded; build with bitwise range checks")
    a1, b1, c1 = prods1 or products(cs, inst1)
    a2, b2, c2 = prods2 or products(cs, inst2)
    m1, m2 = inst1.mu % P, inst2.mu % P
    return [(x1 * y2 + x2 * y1 - m1 * w2 - m2 * w1) % P
            for x1, y1, w1, x2, y2, w2 in zip(a1, b1, c1, a2, b2, c2)]


def fold(cs: ConstraintSystem, inst1: RelaxedInstance, inst2: RelaxedInstance, r: int,
         cross_term: list | None = None) -> RelaxedInstance:
    if cross_term is None:
        cross_term = compute_cross_term(cs, inst1, inst2)
    else:
        _same_shape(cs, inst1, inst2)
        if len(cross_term) != cs.num_rows:
            raise ShapeMismatch("cross term length differs from the row count")
    r %= P
    r2 = r * r % P
    return RelaxedInstance(
        [(x + r * y) % P for x, y in zip(inst1.public, inst2.public)],
        [(x + r * y) % P for x, y in zip(inst1.witness, inst2.witness)],
        (inst1.mu + r * inst2.mu) % P,
        [(e1 + r * t + r2 * e2) % P for e1, t, e2 in zip(inst1.err, cross_term, inst2.err)],
    )


def fold_products(p1, p2, r: int):
    """Matrix products of a folded instance, by linearity."""
    return tuple([(x + r * y) % P for x, y in zip(u, v)] for u, v in zip(p1, p2))


def vector_digest(values) -> int:
    return sponge_digest(values)


def instance_digest(inst: RelaxedInstance, include_witness: bool = True) -> int:
    """Digest of publics, mu and err (and the witness unless excluded)."""
    data = list(inst.public) + [inst.mu] + list(inst.err)
    if include_witness:
        data += list(inst.witness)
    return vector_digest(data)


def derive_challenge(inst1_digest: int, inst2_digest: int, t_digest: int) -> int:
    return poseidon_hash([inst1_digest, inst2_digest, t_digest])
