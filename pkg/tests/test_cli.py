import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from hdsft import cli
from hdsft.cli import RunConfig, main
from hdsft.model import SignalSpec, Tone
from hdsft.oracle_eval import match_score

ROOT = Path(__file__).resolve().parents[1]
REFERENCE = ROOT / "configs" / "reference_spec.json"
DESK = ROOT / "configs" / "desk.json"


def test_gen_writes_valid_spec(tmp_path):
    out = tmp_path / "s.json"
    assert main(["gen", "--k", "1", "--d", "3", "--seed", "4", "--out", str(out)]) == 0
    spec = SignalSpec.load(out).validate(require_tones=True)
    assert spec.k == 1 and spec.d == 3


def test_gen_infeasible_instance(tmp_path, capsys):
    code = main(["gen", "--k", "2", "--d", "2", "--M", "1", "--eta", "3", "--out", str(tmp_path / "x.json")])
    assert code == 2
    assert "diameter" in capsys.readouterr().err


def test_run_is_byte_identical(tmp_path):
    spec = tmp_path / "s.json"
    main(["gen", "--k", "2", "--seed", "5", "--out", str(spec)])
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["run", "--spec", str(spec), "--seed", "5", "--out", str(a)]) == 0
    assert main(["run", "--spec", str(spec), "--seed", "5", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_run_missing_spec_exit_2(tmp_path, capsys):
    missing = tmp_path / "nope.json"
    assert main(["run", "--spec", str(missing)]) == 2
    assert str(missing) in capsys.readouterr().err


def test_run_reference_instance_recall_one(tmp_path):
    out = tmp_path / "r.json"
    before = REFERENCE.read_bytes(), DESK.read_bytes()
    assert main(["run", "--config", str(DESK), "--spec", str(REFERENCE), "--out", str(out)]) == 0
    assert (REFERENCE.read_bytes(), DESK.read_bytes()) == before
    doc = json.loads(out.read_text())
    spec = SignalSpec.load(REFERENCE)
    tones = [Tone(complex(t["re"], t["im"]), tuple(t["w"])) for t in doc["recovered"]]
    assert match_score(spec, tones, spec.eta / 4).recall == 1.0


def test_verify_passes(capsys):
    assert main(["verify"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and "checks passed" in out


def test_verify_mutation_fails(capsys):
    assert main(["verify", "--inject-v2-sign", "-1"]) == 1
    out = capsys.readouterr().out
    assert "FAIL  v2_closed_form_vs_sum" in out


def test_verify_grid_guard(capsys):
    assert main(["verify", "--dense-tf", "8192"]) == 2
    assert "exceeds the guard" in capsys.readouterr().err


def test_sweep_single_dim_matches_run(tmp_path):
    csv_path = tmp_path / "s.csv"
    assert main(["sweep", "--dims", "2", "--trials", "1", "--seed", "3", "--k", "2", "--out", str(csv_path)]) == 0
    row = csv_path.read_text().splitlines()[1].split(",")
    spec = tmp_path / "spec.json"
    main(["gen", "--k", "2", "--d", "2", "--seed", "3", "--out", str(spec)])
    res = tmp_path / "r.json"
    main(["run", "--spec", str(spec), "--seed", "3", "--out", str(res)])
    assert int(row[3]) == json.loads(res.read_text())["total_signal_samples"]


def test_sweep_rows_and_assert_poly(tmp_path, monkeypatch, capsys):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--dims", "2,4,8,16", "--trials", "2", "--assert-poly", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "d,k,seed,samples,wall_time_ms,recall,max_freq_error,failed"
    assert len(lines) == 1 + 4 * 2
    monkeypatch.setattr(cli, "MAX_SLOPE", 0.5)
    assert main(["sweep", "--dims", "2,4", "--trials", "1", "--assert-poly", "--out", str(out)]) == 1


def test_config_round_trip():
    cfg = RunConfig(k=3, d=4, overrides={"T": 32, "F": 128, "s": 8}, dims=[2, 3])
    assert RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


def test_unknown_config_keys_rejected(tmp_path, capsys):
    bad = tmp_path / "c.json"
    bad.write_text(json.dumps({"kk": 1}))
    assert main(["gen", "--config", str(bad)]) == 2
    bad.write_text(json.dumps({"overrides": {"TT": 1}}))
    assert main(["gen", "--config", str(bad)]) == 2
    assert "TT" in capsys.readouterr().err


def test_precedence_flags_over_file_over_defaults(tmp_path):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"k": 3, "d": 3, "seed": 9}))
    args = cli._parser().parse_args(["gen", "--config", str(conf), "--k", "1"])
    cfg = cli.build_config(args)
    assert (cfg.k, cfg.d, cfg.seed, cfg.M) == (1, 3, 9, RunConfig().M)


def test_module_entry_point():
    env = dict(os.environ)
    out = subprocess.run([sys.executable, "-m", "hdsft", "run"], capture_output=True, text=True, env=env)
    assert out.returncode == 2
    out = subprocess.run([sys.executable, "-m", "hdsft", "bogus"], capture_output=True, text=True, env=env)
    assert out.returncode == 2
