import json
import math
from io import StringIO

import numpy as np
import pytest

from entsub.cli import EXIT_INCONCLUSIVE, EXIT_OK, EXIT_USAGE, run


def call(*argv):
    out, err = StringIO(), StringIO()
    code = run([str(a) for a in argv], stdout=out, stderr=err)
    payload = json.loads(out.getvalue()) if out.getvalue() else None
    return code, payload, err.getvalue()


def write(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return path


def construct(tmp_path, *argv):
    code, payload, _ = call("construct", *argv)
    assert code == EXIT_OK
    return write(tmp_path, f"{argv[0]}.json", payload)


def test_construct_ges3qubit():
    code, payload, _ = call("construct", "ges3qubit", "--lambda", "0.3,0.6,0.8")
    assert code == EXIT_OK
    sub = payload["subspace"]
    assert sub["dims"] == [2, 2, 2] and len(sub["basis"]) == 3
    assert payload["seed"] == 0


def test_construct_antisym_exact():
    code, payload, _ = call("construct", "antisym", "--d", 3, "--exact")
    assert code == EXIT_OK
    assert payload["subspace"]["exact"] is True
    assert len(payload["subspace"]["vectors"]) == 3


@pytest.mark.parametrize("argv", [
    ["construct", "ces3x3", "--lambda", "1.5,0.2,0.3,0.4"],
    ["construct", "ces3x3", "--lambda", "0.1,0.2"],
    ["construct", "antisym"],
    ["construct", "nosuchfamily"],
    ["certify"],
])
def test_usage_errors_exit_2(argv):
    code, payload, err = call(*argv)
    assert code == EXIT_USAGE and payload is None
    assert "error" in err


def test_malformed_json_exits_2(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert call("certify", path)[0] == EXIT_USAGE


def test_certify_hw_ges(tmp_path):
    path = construct(tmp_path, "hw-ges")
    code, payload, _ = call("certify", path, "--mode", "numeric")
    assert code == EXIT_OK
    assert [c["verdict"] for c in payload["certificates"]] == ["entangled"] * 3
    assert all(c["lambda1"] <= 0.5 + 1e-6 for c in payload["certificates"])
    assert payload["is_ges"] and payload["restarts"] == 200


def test_certify_finds_product_vector(tmp_path):
    path = write(tmp_path, "span.json", {"dims": [2, 2],
                                         "basis": [[1, 0, 0, 0], [0, 0, 0, 1]]})
    code, payload, _ = call("certify", path)
    assert code == EXIT_OK
    cert = payload["certificates"][0]
    assert cert["verdict"] == "product_found" and "witness" in cert
    assert not payload["is_ges"]


def test_certify_inconclusive_exit_code(tmp_path):
    path = construct(tmp_path, "antisym", "--d", 3)
    code, payload, _ = call("certify", path, "--mode", "numeric", "--restarts", 10)
    assert code == EXIT_INCONCLUSIVE
    assert payload["certificates"][0]["verdict"] == "inconclusive"


def test_exact_certify_reports_groebner(tmp_path):
    path = construct(tmp_path, "ces3x3", "--exact", "--ratio", "1:1,1:2,2:1,3:1")
    code, payload, _ = call("certify", path, "--exact")
    assert code == EXIT_OK
    cert = payload["certificates"][0]
    assert cert["mode"] == "exact" and cert["groebner"] == "{1} on all charts"


def test_fixed_seed_is_byte_identical(tmp_path):
    path = construct(tmp_path, "ges3qubit", "--lambda", "0.2,0.5,0.7")
    outs = []
    for _ in range(2):
        buf = StringIO()
        code = run(["certify", str(path), "--seed", "7", "--restarts", "50"], stdout=buf)
        outs.append((code, buf.getvalue()))
    assert outs[0] == outs[1]


def test_channel_pipeline(tmp_path):
    code, payload, _ = call("channel", "holevo-werner", "--d", 3)
    path = write(tmp_path, "hw.json", payload)
    code, norm, _ = call("channel", "max-norm", path, "--p", 2, "--restarts", 50)
    assert code == EXIT_OK
    assert norm["value"] == pytest.approx(1 / math.sqrt(2), abs=1e-4)
    code, inf_norm, _ = call("channel", "max-norm", path, "--p", "inf", "--restarts", 50)
    assert inf_norm["p"] == "inf" and inf_norm["value"] == pytest.approx(0.5, abs=1e-4)
    code, check, _ = call("channel", "validate", path)
    assert check["valid"] and check["kraus_norm_below_one"] == [True, True, True]
    code, iso, _ = call("channel", "isometry", path)
    assert iso["isometry"]["out_dims"] == [3, 3]


def test_lift_from_antisymmetric_base(tmp_path):
    base = construct(tmp_path, "antisym", "--d", 3)
    code, payload, _ = call("construct", "lift", "--base", base, "--holevo-werner", 3,
                            "--restarts", 20)
    assert code == EXIT_OK
    assert payload["subspace"]["dims"] == [3, 3, 3]


def test_measure_ghz(tmp_path):
    amps = np.zeros(8)
    amps[[0, 7]] = 1 / math.sqrt(2)
    path = write(tmp_path, "ghz.json", {"dims": [2, 2, 2], "amplitudes": list(amps)})
    code, payload, _ = call("measure", path)
    assert code == EXIT_OK
    assert payload["gme"] == pytest.approx(0.5)
    assert len(payload["per_cut"]) == 3
    code, one, _ = call("measure", path, "--measure", "concurrence", "--cut", "0,2")
    assert "gme" not in one and one["per_cut"][0]["cut"] == [0, 2]
    assert one["per_cut"][0]["value"] == pytest.approx(1.0)


def test_measure_mixed_state_needs_negativity(tmp_path):
    path = write(tmp_path, "rho.json", {"dims": [2, 2], "matrix": np.eye(4).tolist()})
    assert call("measure", path)[0] == EXIT_USAGE


def test_bound_and_robustness(tmp_path):
    sub = construct(tmp_path, "hw-ges")
    basis = json.loads(sub.read_text())["subspace"]["basis"][0]
    state = write(tmp_path, "phi.json", {"dims": [3, 3, 3], "amplitudes": basis})
    code, payload, _ = call("bound", state, sub, "--g", "1/2")
    assert code == EXIT_OK and payload["g_source"] == "given"
    report = payload["report"]
    assert report["negativity_lb"] == pytest.approx(0.5)
    assert report["d_used"] == 3
    code, rob, _ = call("robustness", sub, "--g", "1/2")
    assert rob["white"] == 0.5625 and rob["white_exact"] == "9/16"
    code, rob, _ = call("robustness", sub, "--g", "1/2", "--spectrum", ",".join(["1/27"] * 27))
    assert rob["spectrum"] == pytest.approx(0.5625)


def test_output_file_and_tolerance_override(tmp_path):
    path = construct(tmp_path, "antisym", "--d", 3)
    out = tmp_path / "cert.json"
    code, _, _ = call("certify", path, "--mode", "numeric", "--restarts", 10,
                      "--tol", "min_restarts=10", "-o", out)
    assert code == EXIT_OK
    assert json.loads(out.read_text())["certificates"][0]["verdict"] == "entangled"
    assert call("certify", path, "--tol", "nonsense")[0] == EXIT_USAGE


@pytest.mark.parametrize("argv", [
    ["ces3x3", "--lambda", "0.2,0.4,0.6,0.8"],
    ["ges3qubit-orth", "--lambda", "0.2,0.4,0.6"],
    ["ces4x4", "--exact", "--ratio", "1:1,1:1,1:1,1:1,1:1,1:1,1:1"],
    ["ges3qubit", "--exact", "--ratio", "1:1,1:2,2:3"],
])
def test_construct_certify_robustness_pipeline(tmp_path, argv):
    path = construct(tmp_path, *argv)
    code, cert, _ = call("certify", path, "--restarts", 200)
    assert code == EXIT_OK and cert["is_ges"]
    code, rob, _ = call("robustness", path, "--restarts", 30)
    assert code == EXIT_OK and rob["g_source"] == "estimated" and 0 < rob["white"] <= 1
