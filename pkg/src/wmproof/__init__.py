"""Publicly verifiable LLM watermark detection over folded R1CS proofs."""
__version__ = "0.1.0"
