"""JSON file formats shared by the command line tools.

Every file carries ``"format": "wmproof/1"`` and a ``kind``. Field elements are
written as lowercase hex. Keys and mappings use the fixed 64-digit form; bulk
vectors (witnesses, error terms) use minimal-length hex to keep proofs small.
Error vectors are stored sparsely as ``{"len": n, "nz": {index: hex}}``.
"""
from __future__ import annotations

import json
import os
from pathlib import Path

from .circuits import DetectionStatement
from .errors import NonCanonicalEncoding, WmproofError
from .field import P, from_hex, to_hex
from .folding.ivc import FoldStep, IvcProof, SegmentIvcProof
from .merkle import TokenPositionMap
from .r1cs.system import RelaxedInstance
from .watermark.params import SecretKey, WatermarkParams

FORMAT = "wmproof/1"


class FormatError(WmproofError):
    """A file is not a well-formed wmproof/1 document of the expected kind."""


def hx(x: int) -> str:
    return format(int(x) % P, "#x")


def unhx(text) -> int:
    if not isinstance(text, str) or not text.startswith("0x") or len(text) < 3 or len(text) > 66:
        raise NonCanonicalEncoding(f"malformed field element text: {text!r}")
    body = text[2:]
    if body != body.lower() or (len(body) > 1 and body[0] == "0"):
        raise NonCanonicalEncoding(f"non-canonical field element text: {text!r}")
    try:
        v = int(body, 16)
    except ValueError:
        raise NonCanonicalEncoding(f"malformed field element text: {text!r}") from None
    if v >= P:
        raise NonCanonicalEncoding("value is not reduced")
    return v


def _vec(values) -> list:
    return [hx(v) for v in values]


def _unvec(values) -> list:
    if not isinstance(values, list):
        raise FormatError("expected a list of field elements")
    return [unhx(v) for v in values]


def write_json(path, kind: str, body: dict, secret: bool = False) -> None:
    path = Path(path)
    if not path.parent.is_dir():
        raise OSError(f"directory {path.parent} does not exist")
    text = json.dumps({"format": FORMAT, "kind": kind, **body}, indent=1, sort_keys=True)
    if secret:
        # create with owner-only permissions before any content is written
        fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.chmod(path, 0o600)
    else:
        path.write_text(text)


def read_json(path, kind: str) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise FormatError(f"{path}: missing or unknown format header")
    if doc.get("kind") != kind:
        raise FormatError(f"{path}: expected a {kind} file, found {doc.get('kind')!r}")
    return doc


# -- keys, commitments, mappings, texts --------------------------------------------------

def key_to_json(key: SecretKey) -> dict:
    return {"sk": to_hex(key.sk), "s_h": to_hex(key.s_h)}


def key_from_json(doc: dict) -> SecretKey:
    return SecretKey(from_hex(doc["sk"]), from_hex(doc["s_h"]))


def mapping_to_json(m: TokenPositionMap) -> dict:
    return {"n_hat": m.n_hat, "positions": [int(p) for p in m.positions]}


def mapping_from_json(doc: dict) -> TokenPositionMap:
    return TokenPositionMap(doc["positions"], int(doc["n_hat"]))


CONFIG_KEYS = set(WatermarkParams.__dataclass_fields__) | {"n_t", "seed"}


def params_from_config(doc: dict) -> tuple:
    """(WatermarkParams, extras). Unknown keys are rejected."""
    unknown = set(doc) - CONFIG_KEYS - {"format", "kind"}
    if unknown:
        raise FormatError(f"unknown config keys: {sorted(unknown)}")
    fields = {k: v for k, v in doc.items() if k in WatermarkParams.__dataclass_fields__}
    extras = {k: doc[k] for k in ("n_t", "seed") if k in doc}
    return WatermarkParams(**fields), extras


# -- statements and proofs -----------------------------------------------------------

def statement_to_json(stmt: DetectionStatement) -> dict:
    claimed = ([[int(c) for c in row] for row in stmt.claimed] if stmt.scheme == "segment"
               else int(stmt.claimed))
    return {"scheme": stmt.scheme, "params": stmt.params.to_dict(), "tokens": [int(t) for t in stmt.tokens],
            "claimed": claimed, "upsilon": to_hex(stmt.upsilon),
            "root": None if stmt.root is None else to_hex(stmt.root)}


def statement_from_json(doc: dict) -> DetectionStatement:
    params = WatermarkParams.from_dict(doc["params"])
    if doc["scheme"] != params.scheme:
        raise FormatError("statement scheme disagrees with its parameters")
    root = None if doc.get("root") is None else from_hex(doc["root"])
    return DetectionStatement(params.scheme, params, [int(t) for t in doc["tokens"]], doc["claimed"],
                              from_hex(doc["upsilon"]), root)


def err_to_json(err) -> dict:
    return {"len": len(err), "nz": {str(i): hx(e) for i, e in enumerate(err) if e}}


def err_from_json(doc: dict) -> list:
    out = [0] * int(doc["len"])
    for i, v in doc["nz"].items():
        out[int(i)] = unhx(v)
    return out


def instance_to_json(inst: RelaxedInstance) -> dict:
    return {"publics": _vec(inst.public), "mu": hx(inst.mu), "err": err_to_json(inst.err),
            "witness": _vec(inst.witness)}


def instance_from_json(doc: dict) -> RelaxedInstance:
    return RelaxedInstance(_unvec(doc["publics"]), _unvec(doc["witness"]), unhx(doc["mu"]),
                           err_from_json(doc["err"]))


def ivc_to_json(proof: IvcProof) -> dict:
    fc = proof.final_count
    return {
        "scheme": proof.scheme, "n_t": proof.n_t, "n_f": proof.n_f,
        "position": proof.position,
        "acc_hashes": _vec(proof.acc_hashes),
        "chunks": [instance_to_json(c) for c in proof.chunks],
        "transcript": [{"r": hx(s.r), "t_digest": hx(s.t_digest)} for s in proof.transcript],
        "aux": {"publics": _vec(proof.aux_public), "witness": _vec(proof.aux_witness)},
        "final_count": [int(c) for c in fc] if isinstance(fc, list) else int(fc),
        "final_digest": hx(proof.final_digest),
    }


def ivc_from_json(doc: dict) -> IvcProof:
    return IvcProof(
        doc["scheme"], int(doc["n_t"]), int(doc["n_f"]),
        [instance_from_json(c) for c in doc["chunks"]],
        [FoldStep(unhx(s["r"]), unhx(s["t_digest"])) for s in doc["transcript"]],
        _unvec(doc["acc_hashes"]), _unvec(doc["aux"]["publics"]), _unvec(doc["aux"]["witness"]),
        doc["final_count"], unhx(doc["final_digest"]), doc.get("position"),
    )


def segment_ivc_to_json(proof: SegmentIvcProof) -> dict:
    return {"n_t": proof.n_t, "count": proof.count,
            "chains": {str(p): ivc_to_json(c) for p, c in proof.chains.items()}}


def segment_ivc_from_json(doc: dict) -> SegmentIvcProof:
    return SegmentIvcProof(int(doc["n_t"]), {int(p): ivc_from_json(c) for p, c in doc["chains"].items()},
                           doc["count"])
