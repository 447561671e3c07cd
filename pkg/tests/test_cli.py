"""End-to-end command line runs against temp artifact directories."""

import csv
import json

import pytest

from sobolev_lab.cli import main, run, validate_config

RT3 = {"model": "random_transposition", "params": {"n": 3}, "matrix_dim": 1}
TINY_BUDGET = {"restarts": 3, "iterations": 200}


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def test_gap_prints_nine_digits(tmp_path, capsys):
    cfg = write_config(tmp_path, {"command": "gap", "model": RT3,
                                  "out": str(tmp_path / "art")})
    assert main(["--config", cfg]) == 0
    assert capsys.readouterr().out == "2.000000000\n"
    payload = json.loads((tmp_path / "art" / "gap.json").read_text())
    assert payload["verdict"] == "pass"
    assert payload["gap"] == pytest.approx(2.0, abs=1e-9)
    rows = list(csv.reader((tmp_path / "art" / "gap.csv").open()))
    assert rows[0] == ["check_id", "model", "f", "p", "k", "seed",
                       "value", "slack", "verdict"]
    assert rows[1][0] == "gap" and rows[1][-1] == "pass"


def test_gap_json_model_spec_round_trips(tmp_path):
    from sobolev_lab import model_from_spec
    out = tmp_path / "art"
    cfg = write_config(tmp_path, {"command": "gap", "model": RT3})
    assert main(["--config", cfg, "--out", str(out), "--quiet"]) == 0
    stored = json.loads((out / "gap.json").read_text())["model"]
    assert model_from_spec(stored).spec == stored


def test_unknown_key_exits_two(tmp_path, capsys):
    cfg = write_config(tmp_path, {"command": "gap", "model": RT3, "mode": "x"})
    assert main(["--config", cfg]) == 2
    assert "invalid config" in capsys.readouterr().err


def test_unknown_command_exits_two(tmp_path, capsys):
    cfg = write_config(tmp_path, {"command": "solve", "model": RT3})
    assert main(["--config", cfg]) == 2
    err = capsys.readouterr().err
    assert "solve" in err


def test_missing_config_file_exits_two(tmp_path, capsys):
    assert main(["--config", str(tmp_path / "nope.json")]) == 2
    assert "invalid config" in capsys.readouterr().err


def test_unparseable_config_exits_two(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert main(["--config", str(path)]) == 2
    assert "invalid config" in capsys.readouterr().err


def test_estimate_same_seed_identical_bytes(tmp_path):
    payload = {"command": "estimate", "model": RT3,
               "f": {"tag": "power", "p": 1.5}, "budget": TINY_BUDGET,
               "seed": 7}
    cfg = write_config(tmp_path, payload)
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["--config", cfg, "--out", str(out_a), "--quiet"]) == 0
    assert main(["--config", cfg, "--out", str(out_b), "--quiet"]) == 0
    assert ((out_a / "estimate.json").read_bytes()
            == (out_b / "estimate.json").read_bytes())
    assert ((out_a / "estimate.csv").read_bytes()
            == (out_b / "estimate.csv").read_bytes())
    payload = json.loads((out_a / "estimate.json").read_text())
    assert payload["verdict"] == "pass"
    assert 1.5 - 1e-6 <= payload["estimated_lambda"] <= 4.0 + 1e-6


def test_seed_flag_overrides_config(tmp_path):
    payload = {"command": "estimate", "model": RT3,
               "f": {"tag": "power", "p": 1.5}, "budget": TINY_BUDGET,
               "seed": 7}
    cfg = write_config(tmp_path, payload)
    out = tmp_path / "o"
    assert main(["--config", cfg, "--out", str(out), "--seed", "9",
                 "--quiet"]) == 0
    assert json.loads((out / "estimate.json").read_text())["seed"] == 9


def test_decay_run_and_curve(tmp_path, capsys):
    out = tmp_path / "art"
    cfg = write_config(tmp_path, {
        "command": "decay", "model": RT3, "f": {"tag": "power", "p": 1.5},
        "lambda": 1.5, "n_states": 4, "t_grid": [0.0, 0.2, 0.5, 1.0, 2.0]})
    assert main(["--config", cfg, "--out", str(out)]) == 0
    assert "decay verdict pass" in capsys.readouterr().out
    rows = list(csv.reader((out / "decay_curve.csv").open()))
    assert rows[0] == ["t", "entropy", "bound_e_minus_lambda_t"]
    ts = [float(r[0]) for r in rows[1:]]
    ent = [float(r[1]) for r in rows[1:]]
    bound = [float(r[2]) for r in rows[1:]]
    assert ts[0] == 0.0
    assert ent[0] == pytest.approx(bound[0], rel=1e-12)
    assert all(later <= earlier + 1e-12
               for earlier, later in zip(ent, ent[1:]))
    assert all(e <= b + 1e-9 * (1 + abs(b)) for e, b in zip(ent, bound))


def test_pnorm_run(tmp_path):
    out = tmp_path / "art"
    cfg = write_config(tmp_path, {
        "command": "pnorm", "model": RT3, "p": 1.5, "lambda": 0.75,
        "n_states": 5, "t_grid": [0.0, 0.5, 1.5]})
    assert main(["--config", cfg, "--out", str(out), "--quiet"]) == 0
    payload = json.loads((out / "pnorm.json").read_text())
    assert payload["verdict"] == "pass"
    assert payload["command"] == "pnorm"


def test_pnorm_bad_lambda_exits_two(tmp_path, capsys):
    cfg = write_config(tmp_path, {
        "command": "pnorm", "model": RT3, "p": 1.5, "lambda": 1.0,
        "n_states": 2})
    assert main(["--config", cfg, "--out", str(tmp_path / "x")]) == 2
    assert "contract violation" in capsys.readouterr().err


def test_cone_test_smoke(tmp_path):
    out = tmp_path / "art"
    cfg = write_config(tmp_path, {
        "command": "cone-test", "kernel": {"tag": "log"}, "trials": 20,
        "dims": [2, 3], "env_dims": [1, 2]})
    assert main(["--config", cfg, "--out", str(out), "--quiet"]) == 0
    payload = json.loads((out / "cone_test.json").read_text())
    assert payload["verdict"] == "pass"
    assert payload["trials"] == 20
    rows = list(csv.reader((out / "cone_test.csv").open()))
    assert rows[0][0] == "check_id"
    assert rows[1][0] == "cone_membership"


def test_dpi_test_smoke(tmp_path):
    out = tmp_path / "art"
    cfg = write_config(tmp_path, {"command": "dpi-test", "trials": 10})
    assert main(["--config", cfg, "--out", str(out), "--quiet"]) == 0
    payload = json.loads((out / "dpi_test.json").read_text())
    assert payload["verdict"] == "pass"


def test_empty_suite_header_only_csv(tmp_path, capsys):
    out = tmp_path / "art"
    cfg = write_config(tmp_path, {"command": "suite", "checks": []})
    assert main(["--config", cfg, "--out", str(out)]) == 0
    assert "suite verdict pass" in capsys.readouterr().out
    text = (out / "suite.csv").read_text().strip()
    assert text == "check_id,model,f,p,k,seed,value,slack,verdict"
    payload = json.loads((out / "suite.json").read_text())
    assert payload["reports"] == [] and payload["verdict"] == "pass"


def test_suite_check_filter(tmp_path):
    out = tmp_path / "art"
    cfg = write_config(tmp_path, {"command": "suite"})
    assert main(["--config", cfg, "--out", str(out), "--check", "gap",
                 "--quiet"]) == 0
    payload = json.loads((out / "suite.json").read_text())
    assert len(payload["reports"]) == 1
    assert payload["reports"][0]["check"] == "gap"


def test_suite_unknown_check_id_exits_two(tmp_path, capsys):
    cfg = write_config(tmp_path, {"command": "suite", "checks": ["nope"]})
    assert main(["--config", cfg, "--out", str(tmp_path / "x")]) == 2
    assert "contract violation" in capsys.readouterr().err


def test_validate_config_accepts_each_command():
    assert validate_config({"command": "gap", "model": RT3}) == "gap"
    assert validate_config({"command": "suite"}) == "suite"
    with pytest.raises(Exception):
        validate_config(["not", "a", "dict"])


def test_run_callable_directly(tmp_path):
    code = run({"command": "gap", "model": RT3}, out_dir=str(tmp_path),
               quiet=True)
    assert code == 0
    assert (tmp_path / "gap.json").exists()
