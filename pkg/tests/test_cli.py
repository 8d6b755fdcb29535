import json
import math

import numpy as np
import pytest

from matrixbeta.cli import dispatch


def run(argv, capsys):
    code = dispatch(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def load_report(path, drop_runtime=True):
    with open(path, encoding="utf-8") as fh:
        body = json.load(fh)
    assert body["schema_version"] == "1"
    assert "config" in body and "report" in body
    if drop_runtime:
        body["report"].pop("runtime_seconds", None)
    return body


def test_gamma_hand_value(capsys):
    code, out, _ = run(["gamma", "--m", "2", "--r", "1"], capsys)
    assert code == 0
    assert "3.141592653589" in out


def test_beta_and_vol(capsys):
    code, out, _ = run(["beta", "--m", "2", "--r", "2", "--q", "2"], capsys)
    assert code == 0
    assert f"{math.pi / 45:.12f}"[:12] in out
    code, out, _ = run(["vol-orthogonal", "--m", "1"], capsys)
    assert code == 0 and "2.0" in out


def test_usage_error_exit_2(capsys):
    code, _, err = run(["sample", "wishart", "--m", "2", "--a", "1"], capsys)
    assert code == 2
    assert "dof must be >= m" in err
    code, _, _ = run(["gamma", "--m", "2"], capsys)  # missing --r
    assert code == 2


def test_sample_csv_deterministic(tmp_path, capsys):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    for out in (out1, out2):
        code, _, _ = run(
            ["sample", "f1", "--m", "2", "--a", "4", "--b", "4", "--n", "5",
             "--seed", "7", "--out", str(out)],
            capsys,
        )
        assert code == 0
    assert out1.read_text() == out2.read_text()
    header = out1.read_text().splitlines()[0]
    assert header == "f1_11,f1_12,f1_21,f1_22"


def test_sample_beta2_definitions(tmp_path, capsys):
    out = tmp_path / "b2.csv"
    code, _, _ = run(
        ["sample", "beta2", "--m", "2", "--a", "5", "--b", "6", "--n", "3",
         "--seed", "1", "--def", "1", "--out", str(out)],
        capsys,
    )
    assert code == 0
    assert out.read_text().splitlines()[0] == "vech_11,vech_21,vech_22"
    # definition 3 with a < m produces an a x a chart
    code, _, _ = run(
        ["sample", "beta2", "--m", "2", "--a", "1", "--b", "5", "--n", "2",
         "--seed", "1", "--def", "3", "--out", str(out)],
        capsys,
    )
    assert code == 0
    assert out.read_text().splitlines()[0] == "vech_11"


def test_density_commands(capsys):
    code, out, _ = run(
        ["density", "beta2", "--m", "2", "--a", "4", "--b", "4", "--point", "1,0,1"],
        capsys,
    )
    assert code == 0
    assert math.isclose(
        float(out.split("log: ")[1]), math.log(45 / (256 * math.pi)), abs_tol=1e-12
    )
    code, out, _ = run(
        ["density", "roots", "--m", "2", "--a", "4", "--b", "4", "--point", "2,1"],
        capsys,
    )
    assert code == 0
    code, out, _ = run(
        ["density", "f1", "--m", "2", "--a", "4", "--b", "4",
         "--point", "2,0,0,1", "--vol", "2"],
        capsys,
    )
    assert code == 0
    want = math.log(45) + 0.5 * math.log(2) - 4 * math.log(6) - math.log(2)
    assert math.isclose(float(out.split("log: ")[1]), want, abs_tol=1e-12)


def test_verify_jacobian_report_roundtrip(tmp_path, capsys):
    path = tmp_path / "jac.json"
    code, _, _ = run(
        ["verify", "jacobian", "--which", "congruence", "--m", "2",
         "--trials", "10", "--seed", "7", "--out", str(path)],
        capsys,
    )
    assert code == 0
    body = load_report(path)
    rep = body["report"]
    assert rep["which"] == "congruence"
    assert rep["max_rel_err"] < 1e-8
    assert rep["failures"] == []


def test_report_replay_byte_identical(tmp_path, capsys):
    texts = []
    for name in ("r1.json", "r2.json"):
        path = tmp_path / name
        code, _, _ = run(
            ["verify", "spectra", "--m", "2", "--a", "4", "--b", "4",
             "--n", "50", "--seed", "3", "--out", str(path)],
            capsys,
        )
        assert code == 0
        body = load_report(path)
        body["config"].pop("out")
        texts.append(json.dumps(body, sort_keys=True))
    assert texts[0] == texts[1]


def test_verify_eig_density_cli(tmp_path, capsys):
    path = tmp_path / "eig.json"
    code, out, _ = run(
        ["verify", "eig-density", "--m", "2", "--a", "4", "--b", "4",
         "--n", "20000", "--seed", "20", "--out", str(path)],
        capsys,
    )
    assert code == 0
    assert load_report(path)["report"]["verdict"] == "pass"


def test_estimate_vol_cli(tmp_path, capsys):
    path = tmp_path / "vol.json"
    code, out, _ = run(
        ["estimate-vol", "--m", "1", "--a", "2", "--b", "2", "--n", "20000",
         "--seed", "5", "--refs", "5", "--out", str(path)],
        capsys,
    )
    assert code == 0
    rep = load_report(path)["report"]
    assert rep["ci_low"] <= rep["estimate"] <= rep["ci_high"]


def test_experiment_f1_shape_cli(tmp_path, capsys):
    path = tmp_path / "shape.json"
    code, out, _ = run(
        ["experiment", "f1-shape", "--m", "2", "--a", "4", "--b", "4",
         "--n", "100000", "--seed", "9", "--out", str(path)],
        capsys,
    )
    assert code == 0
    rep = load_report(path)["report"]
    assert rep["verdict"] == "informational"
    assert rep["ci"][0] <= rep["statistic"] <= rep["ci"][1]


def test_missing_out_directory_exit_3(tmp_path, capsys):
    code, _, err = run(
        ["verify", "spectra", "--m", "2", "--a", "4", "--b", "4", "--n", "10",
         "--seed", "1", "--out", str(tmp_path / "nope" / "r.json")],
        capsys,
    )
    assert code == 3


def test_config_file_defaults(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 3, "n": 50}))
    code, out, _ = run(
        ["--config", str(cfg), "verify", "spectra", "--m", "2", "--a", "4",
         "--b", "4"],
        capsys,
    )
    assert code == 0
    assert "n=50" in out


def test_env_seed_default(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("MATRIXBETA_SEED", "123")
    p1 = tmp_path / "e1.csv"
    p2 = tmp_path / "e2.csv"
    for p in (p1, p2):
        code, _, _ = run(
            ["sample", "wishart", "--m", "2", "--a", "4", "--n", "2", "--out", str(p)],
            capsys,
        )
        assert code == 0
    assert p1.read_text() == p2.read_text()
