import json
import shutil
import subprocess

import pytest

from oracles import kgw_count
from wmproof import io
from wmproof.cli import main
from wmproof.field import from_hex
from wmproof.watermark import WatermarkParams, commit

GOLDEN_SK = '0x078bfae2414c343c1027c4d1c386bbc4cd613e30d8f16adf91b7584a2265b1f6'
GOLDEN_TOKENS = [103, 10, 22, 30, 9, 58, 93, 62, 12, 71, 64, 14, 92, 20, 4, 74, 40, 104, 91, 125, 44, 74, 80, 38,
                 0, 122, 29, 22]


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip().startswith("{") else out)


@pytest.fixture
def workdir(tmp_path, capsys):
    key, com = tmp_path / "key.json", tmp_path / "c.json"
    assert run(capsys, "keygen", "--out", key, "--commitment", com, "--seed", 1)[0] == 0
    text = tmp_path / "t.json"
    assert run(capsys, "embed", "--key", key, "--vocab", 128, "--n", 24, "--seed", 3, "--out", text)[0] == 0
    return tmp_path


def test_keygen_is_seeded_and_commitment_recomputes(tmp_path, capsys):
    _, a = run(capsys, "keygen", "--out", tmp_path / "a.json", "--seed", 9)
    _, b = run(capsys, "keygen", "--out", tmp_path / "b.json", "--seed", 9)
    _, c = run(capsys, "keygen", "--out", tmp_path / "c.json")
    _, d = run(capsys, "keygen", "--out", tmp_path / "d.json")
    assert a == b and c["upsilon"] != d["upsilon"]
    key = io.key_from_json(io.read_json(tmp_path / "a.json", "key"))
    assert from_hex(a["upsilon"]) == commit(key.sk)
    assert (tmp_path / "a.json").stat().st_mode & 0o777 == 0o600
    assert run(capsys, "commit", "--key", tmp_path / "a.json")[1]["upsilon"] == a["upsilon"]


def test_keygen_bad_directory(tmp_path, capsys):
    assert run(capsys, "keygen", "--out", tmp_path / "missing" / "k.json")[0] == 2


def test_golden_outputs(workdir, capsys):
    # pinned: keygen --seed 1, embed --vocab 128 --n 24 --seed 3
    key = json.loads((workdir / "key.json").read_text())
    assert key["format"] == "wmproof/1"
    assert key["sk"] == GOLDEN_SK
    text = json.loads((workdir / "t.json").read_text())
    assert text["tokens"] == GOLDEN_TOKENS
    code, rep = run(capsys, "detect", "--key", workdir / "key.json", "--text", workdir / "t.json")
    params = WatermarkParams.from_dict(text["params"])
    sk = from_hex(key["sk"])
    assert code == 0 and rep["green_count"] == kgw_count(text["tokens"], params, sk)


@pytest.mark.parametrize("mode", ["monolithic", "ivc"])
def test_prove_verify_happy_path(workdir, capsys, mode):
    proof = workdir / f"{mode}.json"
    extra = ["--nt", 8] if mode == "ivc" else []
    code, _ = run(capsys, "prove", "--key", workdir / "key.json", "--text", workdir / "t.json",
                  "--mode", mode, "--out", proof, *extra)
    assert code == 0
    code, out = run(capsys, "verify", "--proof", proof, "--commitment", workdir / "c.json")
    assert code == 0 and out["accepted"]


@pytest.mark.parametrize("mode", ["monolithic", "ivc"])
def test_tampered_proof_rejected(workdir, capsys, mode):
    proof = workdir / "p.json"
    run(capsys, "prove", "--key", workdir / "key.json", "--text", workdir / "t.json", "--mode", mode,
        "--nt", 8, "--out", proof)
    doc = json.loads(proof.read_text())
    doc["statement"]["claimed"] += 1
    if mode == "ivc":
        doc["ivc"]["final_count"] += 1
    proof.write_text(json.dumps(doc))
    code, out = run(capsys, "verify", "--proof", proof, "--commitment", workdir / "c.json")
    assert code == 1 and not out["accepted"]


def test_verify_does_not_need_key(workdir, capsys):
    proof = workdir / "p.json"
    run(capsys, "prove", "--key", workdir / "key.json", "--text", workdir / "t.json", "--out", proof)
    (workdir / "key.json").unlink()
    assert run(capsys, "verify", "--proof", proof, "--commitment", workdir / "c.json")[0] == 0


def test_missing_key_is_usage_error(workdir, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["prove", "--text", str(workdir / "t.json"), "--out", str(workdir / "x.json")])
    assert exc.value.code == 2


def test_unknown_config_key_rejected(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"format": "wmproof/1", "kind": "config", "scheme": "kgw", "bogus": 1}))
    run(capsys, "keygen", "--out", tmp_path / "k.json", "--seed", 1)
    code, _ = run(capsys, "embed", "--config", cfg, "--key", tmp_path / "k.json", "--out", tmp_path / "t.json")
    assert code == 2


def test_hashtest_report_shape(capsys):
    code, out = run(capsys, "hashtest", "--kind", "poseidon", "--iters", 2, "--trials", 200)
    assert code == 0
    assert set(out) == {"kind", "avalanche", "chi2_mean", "chi2_std", "pass_rate", "iterations"}


def test_sweep_command(workdir, capsys):
    code, out = run(capsys, "sweep", "--text", workdir / "t.json", "--candidates", "1,4,12,24")
    assert code == 0 and [r["n_t"] for r in out["rows"]] == [1, 4, 12, 24]


@pytest.mark.skipif(shutil.which("wmproof") is None, reason="console script not installed")
def test_console_script_usage_exit_code():
    assert subprocess.run(["wmproof", "verify"], capture_output=True).returncode == 2
