"""Relaxed R1CS folding and the chunked detection prover."""
from .ivc import (FoldStep, IvcProof, SegmentIvcProof, acc_hash, build_aux_circuit, build_step_circuit,
                  ivc_prove, ivc_prove_segment, ivc_verify, ivc_verify_segment, segment_groups)
from .sweep import SweepRow, interior_minimum, sweep_nt
from .relaxed import compute_cross_term, derive_challenge, fold, instance_digest, vector_digest

__all__ = [
    "FoldStep", "IvcProof", "SegmentIvcProof", "acc_hash", "build_aux_circuit", "build_step_circuit", "ivc_prove",
    "ivc_prove_segment", "ivc_verify", "ivc_verify_segment", "segment_groups",
    "SweepRow", "interior_minimum", "sweep_nt", "compute_cross_term", "derive_challenge", "fold", "instance_digest", "vector_digest",
]
