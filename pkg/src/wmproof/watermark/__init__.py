"""Watermark embedding and detection for KGW, SynthID-Text and Segment."""
from .detect import detect, detect_kgw, detect_segment, detect_synthid, report_from_claimed, z_score
from .embed import embed, embed_kgw, embed_segment, embed_synthid, generate, tournament
from .lm import LogitsSource, MockLM, UniformLM
from .params import (G_THRESHOLD, SCHEMES, DetectionReport, SecretKey, WatermarkParams, commit,
                     keygen, kgw_params, segment_params, synthid_params, threshold_for)

setup_commit = commit

__all__ = [
    "detect", "detect_kgw", "detect_segment", "detect_synthid", "report_from_claimed", "z_score",
    "embed", "embed_kgw", "embed_segment", "embed_synthid", "generate", "tournament",
    "LogitsSource", "MockLM", "UniformLM",
    "G_THRESHOLD", "SCHEMES", "DetectionReport", "SecretKey", "WatermarkParams", "commit",
    "setup_commit", "keygen", "kgw_params", "segment_params", "synthid_params", "threshold_for",
]
