import json
import subprocess
import sys

import numpy as np
import pytest

from chansim import channels as ch
from chansim import jsonio
from chansim.qec import bit_flip_noise, repetition_code

from conftest import KET0, counterexample_channel


def run_cli(*args, env=None):
    import os

    full_env = dict(os.environ)
    if env:
        full_env.update(env)
    return subprocess.run(
        [sys.executable, "-m", "chansim.cli", *args],
        capture_output=True,
        text=True,
        env=full_env,
    )


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")

    def write(name, payload):
        path = root / name
        jsonio.write_atomic(str(path), payload)
        return str(path)

    out = {
        "id2": write("id2.json", ch.channel_to_dict(ch.identity_channel(2))),
        "deph": write("deph.json", ch.channel_to_dict(ch.dephasing_channel(0.3))),
        "depol": write("depol.json", ch.channel_to_dict(ch.depolarizing_channel(1.0))),
        "damp": write("damp.json", ch.channel_to_dict(ch.amplitude_damping_channel(0.2))),
        "appc": write("appc.json", ch.channel_to_dict(counterexample_channel(0.5))),
        "code3": write("code3.json", ch.isometry_to_dict(repetition_code().encoding, role="encoding")),
        "flip": write("flip.json", ch.channel_to_dict(bit_flip_noise(0.1))),
        "sigma0": write("sigma0.json", {"dim": 2, "matrix": ch.matrix_to_json(KET0)}),
        "ens_orth": write(
            "ens_orth.json",
            {
                "dim": 2,
                "states": [
                    ch.matrix_to_json(np.diag([1.0, 0.0]).astype(complex)),
                    ch.matrix_to_json(np.diag([0.0, 1.0]).astype(complex)),
                ],
            },
        ),
        "ens_same": write(
            "ens_same.json",
            {"dim": 2, "states": [ch.matrix_to_json(KET0), ch.matrix_to_json(KET0)]},
        ),
        "tni": write(
            "tni.json",
            {
                "name": "sub",
                "dim_in": 2,
                "dim_out": 2,
                "tp_mode": "tni",
                "kraus": [ch.matrix_to_json(0.5 * np.eye(2, dtype=complex))],
            },
        ),
        "big5": write("big5.json", ch.channel_to_dict(ch.identity_channel(5))),
        "broken_code": write(
            "broken_code.json",
            ch.isometry_to_dict(
                ch.Isometry(
                    np.array([[1, 0], [0, 0], [0, 0], [0, 1]], dtype=complex), 4, 1
                ),
                role="encoding",
            ),
        ),
        "z1noise": write(
            "z1noise.json",
            ch.channel_to_dict(
                ch.KrausChannel(
                    [
                        np.sqrt(0.5) * np.eye(4, dtype=complex),
                        np.sqrt(0.5)
                        * np.kron(np.diag([1.0, -1.0]).astype(complex), np.eye(2, dtype=complex)),
                    ]
                )
            ),
        ),
        "root": str(root),
    }
    bad = root / "bad.json"
    bad.write_text("{not json")
    out["bad"] = str(bad)
    return out


def test_validate(files):
    r = run_cli("validate", files["id2"])
    assert r.returncode == 0
    payload = json.loads(r.stdout)
    assert payload["tp_mode"] == "tp" and payload["minimal_kraus"] == 1
    r = run_cli("validate", files["depol"])
    assert json.loads(r.stdout)["minimal_kraus"] == 4


def test_validate_malformed(files):
    assert run_cli("validate", files["bad"]).returncode == 2


def test_validate_invariant_violation(files, tmp_path):
    payload = {
        "name": "broken",
        "dim_in": 2,
        "dim_out": 2,
        "tp_mode": "tp",
        "kraus": [ch.matrix_to_json(0.5 * np.eye(2, dtype=complex))],
    }
    path = tmp_path / "broken.json"
    jsonio.write_atomic(str(path), payload)
    assert run_cli("validate", str(path)).returncode == 3


def test_complementary(files, tmp_path):
    out = tmp_path / "comp.json"
    r = run_cli("complementary", files["id2"], "--out", str(out))
    assert r.returncode == 0
    payload = json.loads(out.read_text())
    assert payload["dim_out"] == 1
    r = run_cli("complementary", files["deph"], "--out", str(out))
    assert json.loads(out.read_text())["dim_out"] == 2
    assert run_cli("complementary", files["tni"]).returncode == 3


def test_kl_check(files):
    assert run_cli("kl-check", files["code3"], files["flip"]).returncode == 0
    r = run_cli("kl-check", files["broken_code"], files["z1noise"])
    assert r.returncode == 1
    assert json.loads(r.stdout)["residual"] > 1e-3


def test_algebra_check(files, tmp_path):
    alg = ch.trivial_algebra(2)
    path = tmp_path / "alg.json"
    jsonio.write_atomic(str(path), ch.algebra_to_dict(alg))
    r = run_cli("algebra-check", str(path), files["code3"], files["flip"])
    assert r.returncode == 0


def test_bounds_correctable(files):
    r = run_cli("bounds", files["flip"], "--code", files["code3"])
    assert r.returncode == 0
    payload = json.loads(r.stdout)
    assert payload["bounds"][0] == pytest.approx(1.0, abs=1e-8)
    assert payload["recovery"] is not None


def test_bounds_counterexample(files):
    r = run_cli("bounds", files["appc"], "--sigma", files["sigma0"])
    assert r.returncode == 0
    payload = json.loads(r.stdout)
    assert payload["f0"] ** 2 == pytest.approx(0.5, abs=1e-6)
    assert payload["recovery"] is None
    assert not payload["full_rank"]
    assert payload["warnings"]


def test_recover_verify_roundtrip(files, tmp_path):
    rec = tmp_path / "rec.json"
    r = run_cli("recover", files["damp"], "--out", str(rec))
    assert r.returncode == 0
    r = run_cli("verify", files["damp"], str(rec))
    payload = json.loads(r.stdout)
    assert r.returncode == 1  # recovery is near-optimal, not exact
    bounds = json.loads(run_cli("bounds", files["damp"]).stdout)
    assert payload["fidelity"] >= bounds["f0"] - 1e-6


def test_recover_abstains(files):
    r = run_cli("recover", files["appc"], "--sigma", files["sigma0"])
    assert r.returncode == 1
    assert "rank deficient" in r.stderr


def test_verify_exact(files, tmp_path):
    rec = tmp_path / "rec3.json"
    assert run_cli("recover", files["flip"], "--code", files["code3"], "--out", str(rec)).returncode == 0
    # verification composes the recovery with the encoded channel
    enc = ch.encode_then_noise(repetition_code().encoding, bit_flip_noise(0.1))
    enc_path = tmp_path / "enc.json"
    jsonio.write_atomic(str(enc_path), ch.channel_to_dict(enc))
    r = run_cli("verify", str(enc_path), str(rec))
    assert r.returncode == 0
    assert json.loads(r.stdout)["fidelity"] >= 1.0 - 1e-7


def test_discriminate(files):
    r = run_cli("discriminate", files["ens_orth"])
    assert r.returncode == 0
    payload = json.loads(r.stdout)
    assert payload["delta"] == pytest.approx(0.0, abs=1e-8)
    r = run_cli("discriminate", files["ens_same"], "--oracle")
    payload = json.loads(r.stdout)
    assert payload["delta"] == pytest.approx(1 - 1 / np.sqrt(2), abs=1e-7)
    lo, hi = payload["error_bracket"]
    assert lo - 1e-9 <= payload["oracle_error"] <= hi + 1e-9


def test_duality_check_cli(files):
    r = run_cli("duality-check", files["deph"], files["id2"], "--budget", "4")
    assert r.returncode == 0
    payload = json.loads(r.stdout)
    assert payload["gap"] <= 5e-3
    assert run_cli("duality-check", files["big5"], files["big5"]).returncode == 4


def test_deterministic_output(files):
    a = run_cli("bounds", files["damp"], "--seed", "7")
    b = run_cli("bounds", files["damp"], "--seed", "7")
    assert a.stdout == b.stdout
    c = run_cli("bounds", files["damp"], env={"QDK_SEED": "7"})
    assert c.stdout == a.stdout


def test_tolerance_override(files):
    r = run_cli("duality-check", files["deph"], files["id2"], "--budget", "4", "--tol", "duality_gap=1e-12")
    # with an absurd tolerance the verdict flips to negative
    assert r.returncode in (0, 1)
    r2 = run_cli("validate", files["id2"], "--tol", "nonsense=1")
    assert r2.returncode == 2
