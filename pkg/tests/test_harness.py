import json
import os
import subprocess
import sys

import numpy as np
import pytest
import yaml

from symplectic_entropy.errors import ConfigError
from symplectic_entropy.harness import canonical_text, config_hash, load_config, make_config, run
from symplectic_entropy.harness.cli import main
from symplectic_entropy.harness.io import atomic_write_text, csv_text, read_json, write_json
from symplectic_entropy.harness.runner import (
    NO_HYPERBOLIC_ORBIT,
    RUELLE_DIRECTION,
    STAGE_FAILED,
    likely_cause,
    ComparisonReport,
    load_report,
    render_report,
    run_dir,
)

SMALL_ENTROPY = {"epsilons": [0.02], "n_max": 6, "grid": 100}


def small_config(tmp_path, **extra):
    data = {"output_dir": str(tmp_path), "entropy": SMALL_ENTROPY}
    data.update(extra)
    return make_config(data)


def test_canonical_text_normalizes_numbers_and_order():
    a = {"model": {"k": 1.0, "family": "standard_map"}, "entropy": {"epsilons": [1e-2]}}
    b = {"entropy": {"epsilons": [0.01]}, "model": {"family": "standard_map", "k": 1}}
    assert canonical_text(a) == canonical_text(b)
    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash({**a, "model": {"family": "standard_map", "k": 1.2}})


def test_hash_ignores_output_dir():
    assert make_config({"output_dir": "x"}).hash == make_config({"output_dir": "y"}).hash


def test_yaml_config_round_trip(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text(yaml.safe_dump({"model": {"family": "standard_map", "k": 2.0},
                                    "entropy": {"n_max": 8, "epsilons": [0.01]}}))
    cfg = load_config(path)
    assert cfg["entropy"]["n_max"] == 8
    assert cfg["entropy"]["grid"] == 1000
    assert cfg.hash == make_config({"model": {"family": "standard_map", "k": 2},
                                    "entropy": {"n_max": 8, "epsilons": [1e-2]}}).hash


@pytest.mark.parametrize("data", [
    {"entropy": {"n_max": 2}},
    {"entropy": {"epsilons": []}},
    {"entropy": {"epsilons": [-0.1]}},
    {"model": {"family": "nope"}},
    {"model": {"family": "standard_map"}},
    {"model": {"family": "cat", "k": 1}},
    {"stages": ["scan", "fly"]},
    {"snake": {"N_list": [4]}},
    {"unknown": 1},
    {"scan": {"bogus": 1}},
])
def test_config_validation(data):
    with pytest.raises(ConfigError):
        make_config(data)


def test_bad_yaml(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("model: [unclosed")
    with pytest.raises(ConfigError):
        load_config(path)


def test_atomic_write_replaces(tmp_path):
    target = tmp_path / "sub" / "f.txt"
    atomic_write_text(target, "one")
    atomic_write_text(target, "two")
    assert target.read_text() == "two"
    assert [p.name for p in target.parent.iterdir()] == ["f.txt"]


def test_csv_uses_repr_floats():
    text = csv_text(["a", "b", "c"], [[0.1, 1 / 3, True], [None, 2, np.float64(1e-17)]])
    assert text == "a,b,c\n0.1,0.3333333333333333,true\n,2,1e-17\n"


def test_json_schema_version(tmp_path):
    write_json(tmp_path / "x.json", {"v": np.array([1.0, 2.0])})
    data = read_json(tmp_path / "x.json")
    assert data["schema_version"] == 1 and data["v"] == [1.0, 2.0]


def test_cat_run_report(tmp_path):
    cfg = small_config(tmp_path, entropy={"epsilons": [0.01], "n_max": 8, "grid": 300})
    report = run(cfg)
    assert report.status == "complete" and report.exit_code == 0
    assert report.S_lower["value"] == pytest.approx(np.log((3 + np.sqrt(5)) / 2), abs=1e-10)
    assert abs(report.gap) < 0.15
    assert RUELLE_DIRECTION not in report.codes
    out = run_dir(cfg)
    assert {p.name for p in out.iterdir()} >= {"orbits.csv", "counts.csv", "entropy.json", "report.json",
                                               "run_info.json", "config.json"}
    assert read_json(out / "report.json")["schema_version"] == 1
    text = render_report(report)
    assert "S_lower = 0.962424" in text


def test_identity_run_notes_missing_orbit(tmp_path):
    report = run(small_config(tmp_path, model={"family": "identity"}, scan={"grid": 4}))
    assert report.h_est["value"] == 0.0
    assert report.S_lower["value"] is None
    assert NO_HYPERBOLIC_ORBIT in report.codes
    assert not report.inconsistencies
    assert report.gap is None


def test_cache_reuses_completed_run(tmp_path):
    cfg = small_config(tmp_path)
    first = run(cfg)
    info = (run_dir(cfg) / "run_info.json").read_text()
    second = run(cfg)
    assert second.to_dict() == first.to_dict()
    assert (run_dir(cfg) / "run_info.json").read_text() == info


def test_reruns_are_byte_identical(tmp_path):
    data = {"entropy": SMALL_ENTROPY, "model": {"family": "standard_map", "k": 2.0},
            "stages": ["scan", "entropy", "mixing"], "mixing": {"m_list": [1, 5]}}
    a = make_config({**data, "output_dir": str(tmp_path / "a")})
    b = make_config({**data, "output_dir": str(tmp_path / "b")})
    run(a), run(b)
    for name in ("orbits.csv", "counts.csv", "mixing.csv", "report.json", "entropy.json"):
        assert (run_dir(a) / name).read_bytes() == (run_dir(b) / name).read_bytes()


def test_stage_failure_gives_partial_report(tmp_path):
    cfg = small_config(tmp_path, model={"family": "torus_automorphism", "matrix": [[2, 0], [0, 1]]},
                       stages=["scan", "mixing"], mixing={"m_list": [1]})
    report = run(cfg)
    assert report.status == "partial" and report.exit_code == 1
    assert "scan" in report.stage_errors
    assert STAGE_FAILED in report.codes
    assert report.mixing is not None
    # partial runs are not served from the cache
    again = run(cfg)
    assert again.status == "partial"


def test_snake_stage_monotone(tmp_path):
    cfg = small_config(tmp_path, stages=["snake"], snake={"N_list": [3, 5, 7]})
    report = run(cfg)
    values = [c["certificate"]["entropy"] for c in report.certificates]
    assert values == sorted(values)
    assert report.certificates[0]["check"]["estimator_entropy"] == pytest.approx(values[0], abs=1e-12)
    assert not report.inconsistencies


def test_report_round_trip(tmp_path):
    cfg = small_config(tmp_path, stages=["mixing"], mixing={"m_list": [1, 2]})
    report = run(cfg)
    again = load_report(run_dir(cfg))
    assert isinstance(again, ComparisonReport)
    assert again.to_dict() == json.loads(json.dumps(report.to_dict()))


def test_cli_exit_codes(tmp_path, capsys):
    out = str(tmp_path)
    assert main(["models"]) == 0
    assert "standard_map" in capsys.readouterr().out
    assert main(["entropy", "--out", out, "--n-max", "2"]) == 2
    assert "n_max" in capsys.readouterr().err
    assert main(["scan", "--out", out, "--model", "torus_automorphism", "--param", "matrix=[[2,0],[0,1]]"]) == 1
    with pytest.raises(SystemExit) as info:
        main(["fly"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["scan", "--bogus"])
    assert info.value.code == 2


def test_cli_mix_demo_table(tmp_path, capsys):
    assert main(["mix-demo", "--out", str(tmp_path), "--m-list", "1,10,100,1000"]) == 0
    text = capsys.readouterr().out
    gaps = [float(line.split()[-1]) for line in text.splitlines() if line.strip()[:1].isdigit()]
    assert gaps == sorted(gaps, reverse=True) and gaps[-1] < 0.01
    assert "first m with gap < 0.01: 179" in text


def test_cli_scan_lyapunov_report(tmp_path, capsys):
    out = str(tmp_path)
    assert main(["scan", "--out", out, "--model", "standard_map", "--param", "k=1.2", "--max-period", "2"]) == 0
    text = capsys.readouterr().out
    assert "S_lower = 1.0469" in text
    run_path = text.strip().splitlines()[-1].split("artifacts: ")[1]
    assert main(["report", run_path]) == 0
    assert "S_lower = 1.0469" in capsys.readouterr().out
    assert main(["report", str(tmp_path / "missing")]) == 2
    capsys.readouterr()
    assert main(["lyapunov", "--model", "cat", "--point", "0.1,0.2", "--steps", "200"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["S"] == pytest.approx(np.log((3 + np.sqrt(5)) / 2), abs=1e-2)
    assert main(["lyapunov", "--model", "cat", "--point", "0.1"]) == 2


def test_cli_entropy_and_snake(tmp_path, capsys):
    out = str(tmp_path)
    assert main(["entropy", "--out", out, "--eps-list", "0.02", "--n-max", "5", "--grid", "80",
                 "--seed-order", "-1"]) == 0
    assert "h_est" in capsys.readouterr().out
    assert main(["snake-demo", "--out", out, "--N-list", "3"]) == 0
    assert "components=3" in capsys.readouterr().out


def test_module_entry_point(tmp_path):
    env = {**os.environ, "SYMPLECTIC_ENTROPY_WORKERS": "2"}
    proc = subprocess.run([sys.executable, "-m", "symplectic_entropy", "models"], capture_output=True,
                          text=True, env=env)
    assert proc.returncode == 0 and "cat_product" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "symplectic_entropy", "entropy", "--n-max", "1",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 2


def test_likely_cause_attribution():
    stable = {"rates": [0.95, 0.97], "windows": [[1, 8], [1, 6]]}
    assert likely_cause(stable, 0.1) == "insufficient periodic search"
    spread = {"rates": [0.7, 1.2], "windows": [[1, 8], [1, 6]]}
    assert likely_cause(spread, 0.1) == "estimator over-count"
    short = {"rates": [1.0], "windows": [[1, 2]]}
    assert likely_cause(short, 0.1) == "estimator over-count"
