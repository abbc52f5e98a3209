import csv
import json
import subprocess
import sys

import pytest

from steinlab import cli, lp
from steinlab.checks import REGISTRY
from steinlab.runner import run_scenario
from steinlab.scenario import SCHEMA, parse_scenario, resolve


def small_config(**extra):
    data = {"schema": SCHEMA, "name": "tiny", "seed": 3,
            "null": {"kind": "composite_iid", "base": [[0.8, 0.2]]},
            "alternative": {"kind": "composite_iid", "base": [[0.4, 0.6]]},
            "eps": 0.2, "n_max": 4, "checks": ["stein-sequence", "transition-bound", "nasty-estimate"]}
    data.update(extra)
    return data


def write_config(tmp_path, data):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(data))
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_list_checks(capsys):
    assert cli.main(["list-checks"]) == 0
    out = capsys.readouterr().out
    assert "duality-sandwich" in out and "definetti-type-bound" in out
    assert len(REGISTRY) >= 12
    assert f"{len(REGISTRY)} checks registered" in out


def test_list_scenarios(capsys):
    assert cli.main(["list-scenarios"]) == 0
    out = capsys.readouterr().out
    for name in ("sanov-binary", "werner-gamma2", "toolbox", "iid-vs-av"):
        assert name in out


@pytest.mark.parametrize("mutation", [
    {"eps": 1.5}, {"n_max": 0}, {"checks": ["no-such-check"]}, {"schema": "v0"},
    {"colour": "blue"}, {"null": {"kind": "martian"}}, {"params": {"stein-sequence": {"bogus": 1}}},
    {"params": {"duality-sandwich": {}}}, {"checks": []}, {"log_base": "10"},
])
def test_malformed_config_exit_2(tmp_path, mutation, capsys):
    cfg = write_config(tmp_path, small_config(**mutation))
    out = tmp_path / "out"
    assert cli.main(["run", str(cfg), "--out", str(out)]) == 2
    assert not out.exists()
    assert "config error" in capsys.readouterr().err


def test_invalid_json_exit_2(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{not json")
    assert cli.main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert not (tmp_path / "o").exists()
    assert cli.main(["run", str(tmp_path / "missing.json")]) == 2


def test_bad_jobs(tmp_path):
    cfg = write_config(tmp_path, small_config())
    assert cli.main(["run", str(cfg), "--jobs", "0", "--out", str(tmp_path / "o")]) == 2


def test_run_writes_report(tmp_path):
    cfg = write_config(tmp_path, small_config())
    out = tmp_path / "o"
    assert cli.main(["run", str(cfg), "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["exit_code"] == 0 and summary["seed"] == 3 and summary["unit"] == "bits"
    assert summary["version"]
    assert set(summary["checks"]) == {"stein-sequence", "transition-bound", "nasty-estimate"}
    assert (out / "timings.json").exists()
    rows = read_csv(out / "stein-sequence.csv")
    assert len(rows) == 1 + 4


def test_seed_override_changes_random_tables(tmp_path):
    cfg = write_config(tmp_path, small_config())
    cli.main(["run", str(cfg), "--out", str(tmp_path / "a")])
    cli.main(["run", str(cfg), "--out", str(tmp_path / "b"), "--seed", "99"])
    a = (tmp_path / "a" / "nasty-estimate.csv").read_text()
    b = (tmp_path / "b" / "nasty-estimate.csv").read_text()
    assert a != b


def test_sanov_binary(tmp_path):
    sc = resolve("sanov-binary")
    rep = run_scenario(sc, tmp_path, jobs=1)
    assert rep.exit_code == 0
    rows = read_csv(tmp_path / "stein-sequence.csv")
    header, body = rows[0], rows[1:]
    assert [int(r[0]) for r in body] == list(range(1, 9))
    assert any(h.startswith("target") for h in header)


def test_werner_gamma2(tmp_path):
    sc = resolve("werner-gamma2")
    sc = parse_scenario(sc.to_dict() | {"checks": ["example-werner"], "params": {}})
    rep = run_scenario(sc, tmp_path)
    assert rep.exit_code == 0
    rows = read_csv(tmp_path / "example-werner.csv")
    assert len(rows) == 1 + 3
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["checks"]["example-werner"]["passed"] is True


def test_units_in_headers(tmp_path, monkeypatch):
    for base, unit in (("2", "bits"), ("e", "nats")):
        sc = parse_scenario(small_config(log_base=base, checks=["stein-sequence", "meta-lemma-rates"]))
        run_scenario(sc, tmp_path / base)
        header = read_csv(tmp_path / base / "stein-sequence.csv")[0]
        assert any(h.endswith(f"[{unit}]") for h in header)
        other = "nats" if unit == "bits" else "bits"
        assert not any(h.endswith(f"[{other}]") for h in header)


def test_env_log_base(tmp_path):
    cfg = write_config(tmp_path, small_config(checks=["stein-sequence"]))
    env = {"STEIN_LAB_LOG_BASE": "e", "PATH": "/usr/bin:/bin"}
    import os
    env = os.environ | env
    r = subprocess.run([sys.executable, "-m", "steinlab.cli", "run", str(cfg), "--out", str(tmp_path / "o")],
                       env=env, capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert json.loads((tmp_path / "o" / "summary.json").read_text())["unit"] == "nats"


def test_deterministic_across_jobs(tmp_path):
    sc = parse_scenario(small_config(checks=["stein-sequence", "nasty-estimate", "transition-bound",
                                             "hamming-concentration"],
                                     params={"hamming-concentration": {"n": 6, "trials": 10}}))
    run_scenario(sc, tmp_path / "serial", jobs=1)
    run_scenario(sc, tmp_path / "parallel", jobs=3)
    for f in sorted((tmp_path / "serial").iterdir()):
        if f.name == "timings.json":
            continue
        assert f.read_bytes() == (tmp_path / "parallel" / f.name).read_bytes(), f.name


def test_capacity_exit_3(tmp_path, monkeypatch, capsys):
    monkeypatch.setattr(lp, "MAX_TABLEAU", 2000)
    av = {"kind": "arbitrarily_varying", "base": [[0.5, 0.5], [0.4, 0.6]]}
    cfg = write_config(tmp_path, small_config(n_max=6, alternative=av, checks=["stein-sequence"]))
    out = tmp_path / "o"
    assert cli.main(["run", str(cfg), "--out", str(out)]) == 3
    summary = json.loads((out / "summary.json").read_text())
    entry = summary["checks"]["stein-sequence"]
    assert entry["status"] == "capacity" and summary["exit_code"] == 3
    rows = read_csv(out / "stein-sequence.csv")
    assert 1 <= len(rows) - 1 < 6


def test_divergence_command(capsys):
    assert cli.main(["divergence", "--kind", "kl", "--p", "0.5,0.5", "--q", "0.25,0.75"]) == 0
    value, unit = capsys.readouterr().out.split()
    assert unit == "bits" and float(value) == pytest.approx(0.5 * 1 + 0.5 * (-0.5849625007211562))
    assert cli.main(["divergence", "--kind", "dhyp", "--p", "[1,0]", "--q", "[0.5,0.5]", "--eps", "0.5"]) == 0
    assert float(capsys.readouterr().out.split()[0]) == pytest.approx(2.0)
    assert cli.main(["divergence", "--kind", "dmax", "--p", "1,0", "--q", "0.5,0.5"]) == 0
    assert float(capsys.readouterr().out.split()[0]) == pytest.approx(1.0)
    assert cli.main(["divergence", "--kind", "kl", "--p", "1,0", "--q", "0,1"]) == 0
    assert capsys.readouterr().out.startswith("inf")
    assert cli.main(["divergence", "--kind", "dhyp", "--p", "1,0", "--q", "0.5,0.5"]) == 2
    assert cli.main(["divergence", "--kind", "kl", "--p", "1,0", "--q", "0.2,0.3,0.5"]) == 2
