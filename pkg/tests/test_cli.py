import io
import json

import pytest

from boxes_sim.cli import main
from boxes_sim.fieldio import read_field


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_probability_report():
    code, out, _ = run("probability")
    assert code == 0
    assert out.count("P_c=0.431") == 2 and out.count("P_t=0.431") == 2
    assert "512x512" in out and "+/-0.001" in out


def test_probability_single_value():
    code, out, _ = run("probability", "--formulation", "cf", "--box", "b1")
    assert (code, out) == (0, "0.431\n")
    _, full, _ = run("probability", "--formulation", "tsf", "--final-box", "B2", "--full-precision")
    assert abs(float(full) - 0.43103448275862) < 1e-9


def test_probability_json():
    code, out, _ = run("probability", "--json")
    doc = json.loads(out)
    assert code == 0 and len(doc["results"]) == 4
    assert {r["formulation"] for r in doc["results"]} == {"CF", "TSF"}


def test_malformed_config(tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("[physics]\nmass = \n")
    code, _, err = run("probability", "--config", str(cfg))
    assert code == 1
    assert f"{cfg}:2:" in err


def test_invalid_value_names_key(tmp_path):
    cfg = tmp_path / "neg.toml"
    cfg.write_text("[physics]\nmass = -1.0\n")
    code, _, err = run("probability", "--config", str(cfg))
    assert code == 1 and "physics.mass" in err


def test_missing_config_is_io_error(tmp_path):
    code, _, err = run("probability", "--config", str(tmp_path / "missing.toml"))
    assert code == 3 and "missing.toml" in err


def test_unknown_flag():
    assert run("probability", "--bogus")[0] == 1


def test_snapshot_cf(tmp_path):
    code, out, _ = run("snapshot", "--formulation", "cf", "--out", str(tmp_path))
    assert code == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == sorted(f"cf_{t}.{ext}" for t in (0, 1000, 3000, 4000) for ext in ("grid", "pgm"))
    f, q = read_field(tmp_path / "cf_3000.grid")
    assert q == "psi_density" and f.t == 3000.0


def test_snapshot_tsf_requires_final_box(tmp_path):
    code, _, err = run("snapshot", "--formulation", "tsf", "--out", str(tmp_path))
    assert code == 1 and "MissingFinalCondition" in err


def test_snapshot_unwritable(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, _, err = run("snapshot", "--formulation", "cf", "--out", str(blocker / "sub"))
    assert code == 3 and str(blocker) in err


def test_snapshot_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run("snapshot", "--formulation", "tsf", "--final-box", "b1", "--out", str(d))[0] == 0
    for p in a.iterdir():
        assert p.read_bytes() == (b / p.name).read_bytes()


def test_sample_small_is_deterministic():
    first = run("sample", "-n", "10", "--seed", "7")
    second = run("sample", "-n", "10", "--seed", "7")
    assert first == second
    lines = first[1].splitlines()
    records = [json.loads(x) for x in lines if not x.startswith("#")]
    assert [r["run_id"] for r in records] == list(range(10))
    assert all(r["formulation"] == "CF" for r in records)
    assert any(x.startswith("# B1") for x in lines)


def test_sample_generates_seed():
    code, out, err = run("sample", "-n", "3", "--json")
    assert code == 0 and err.startswith("seed ")
    seed = int(err.split()[1])
    summary = json.loads(out.splitlines()[-1])["summary"]
    assert summary["seed"] == seed and summary["n_runs"] == 3


def test_sample_log_file(tmp_path):
    log = tmp_path / "runs.jsonl"
    code, out, _ = run("sample", "-n", "5", "--seed", "1", "--log", str(log), "--formulation", "tsf")
    assert code == 0
    assert len(log.read_text().splitlines()) == 5
    assert out.startswith("# TSF n=5 seed=1")


def test_sample_rejects_zero_runs():
    assert run("sample", "-n", "0", "--seed", "1")[0] == 1


def test_verify_single_check():
    code, out, _ = run("verify", "--dt", "4000", "--check", "overlap-invariance")
    assert code == 0
    rows = [x.split() for x in out.splitlines()[1:]]
    assert [r[0] for r in rows] == ["overlap-adjoint", "overlap-invariance"]
    assert all(float(r[1]) < 1e-10 and r[3] == "pass" for r in rows)


def test_verify_aliasing_grid():
    code, out, _ = run("verify", "--grid", "64")
    assert code == 2
    assert "AliasingRisk" in out


@pytest.mark.slow
def test_verify_defaults():
    code, out, _ = run("verify", "--json")
    assert code == 0
    assert all(r["passed"] for r in json.loads(out))
