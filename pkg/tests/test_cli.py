import csv
import json

import pytest

from sidetick import __version__
from sidetick.cli import DEFAULTS, PRESETS, Config, main
from sidetick.errors import ConfigurationError
from sidetick.zones import Transaction, write_transactions

FAST = ["--set", "model.T=2", "--set", "grid.mesh_div=4"]


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_every_preset_expands_to_a_full_config():
    for name in PRESETS:
        cfg = Config.load(preset=name)
        text = cfg.dump()
        again = Config.load(overrides=[], preset=None)
        assert set(again.values) == set(cfg.values) == set(DEFAULTS)
        assert f"preset = {name}" in text
        for section, keys in DEFAULTS.items():
            assert set(cfg[section]) == set(keys)


def test_scan_axis_syntax():
    spec = Config.load(overrides=["scan.alpha_a=0.5/n:0.01:0.0125", "scan.alpha_b=0.01,0.02",
                                  "scan.phi_minus=0,0.005"]).scan_spec()
    assert spec.alpha_a[0] == 0.01 and spec.alpha_a[-1] == 0.0125 and len(spec.alpha_a) == 11
    assert spec.alpha_b == (0.01, 0.02) and spec.phi_minus == (0.0, 0.005)
    assert Config.load(preset="fig1").scan_spec().alpha_a[-1] == 0.05
    with pytest.raises(ConfigurationError, match="alpha_a"):
        Config.load(overrides=["scan.alpha_a=0.01:0.02"])


def test_config_file_and_overrides(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text("[model]\nlam = 2.5\n[run]\nseed = 4\n")
    cfg = Config.load(str(path), ["model.T=3"])
    assert cfg["model"]["lam"] == 2.5 and cfg["model"]["T"] == 3.0
    assert cfg["run"]["seed"] == 4
    # a dumped config loads back to itself
    dumped = tmp_path / "d.ini"
    dumped.write_text(cfg.dump())
    assert Config.load(str(dumped)).values == cfg.values


@pytest.mark.parametrize("bad,name", [("model.lamda=3", "lamda"), ("nosuch.key=1", "nosuch"),
                                      ("model.lam=fast", "lam"), ("model", "model"),
                                      ("grid.periodic=maybe", "periodic")])
def test_bad_overrides_name_the_key(bad, name):
    with pytest.raises(ConfigurationError) as exc:
        Config.load(overrides=[bad])
    assert name in str(exc.value)


def test_unknown_key_in_file_is_rejected(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text("[model]\nsigmaa = 0.01\n")
    with pytest.raises(ConfigurationError, match="sigmaa"):
        Config.load(str(path))


def test_exit_code_for_invalid_input(tmp_path, capsys):
    assert main(["solve", "--out", str(tmp_path), "--set", "model.lamda=1"]) == 1
    assert "lamda" in capsys.readouterr().err
    assert main(["solve", "--out", str(tmp_path), "--set", "model.sigma=-1"]) == 1


def test_exit_code_for_failed_numerical_check(tmp_path):
    # the exponential fill is a different scheme, so the solver cannot match it
    assert main(["oracle-check", "--out", str(tmp_path), "--set", "oracle.T=0.5",
                 "--set", "oracle.fill=exponential"]) == 2


def test_solve_outputs_are_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["solve", "--out", str(a), *FAST]) == 0
    assert main(["solve", "--out", str(b), *FAST]) == 0
    for name in ("values.csv", "summary.json", "VERSION"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert (a / "config.ini").read_text().replace(str(a), "") == \
        (b / "config.ini").read_text().replace(str(b), "")
    assert (a / "VERSION").read_text().strip() == f"sidetick {__version__}"


def test_simulate(tmp_path):
    out = tmp_path / "sim"
    assert main(["simulate", "--out", str(out), "--seed", "3", *FAST,
                 "--set", "sim.n_paths=30", "--set", "sim.log_changes=true"]) == 0
    data = json.loads((out / "summary.json").read_text())
    assert data["n_paths"] == 30 and data["seed"] == 3
    assert "pde" in data
    assert len(_rows(out / "paths.csv")) == 31
    assert _rows(out / "changes_0.csv")[0] == ["time", "price", "side"]
    assert (out / "config.ini").exists() and (out / "VERSION").exists()


def test_scan(tmp_path):
    out = tmp_path / "scan"
    assert main(["scan", "--out", str(out), *FAST, "--set", "scan.alpha_a=0.01,0.0125",
                 "--set", "scan.alpha_b=0.01", "--set", "scan.mesh_div=4"]) == 0
    rows = _rows(out / "scan.csv")
    assert rows[0][:4] == ["alpha_a", "alpha_b", "phi_minus", "v"]
    assert len(rows) == 3
    assert json.loads((out / "argmax.json").read_text())["n_points"] == 2


def test_estimate_eta(tmp_path):
    tx = tmp_path / "tx.csv"
    p, rows = 10.0, [Transaction(0.0, 10.0, "a")]
    for i, m in enumerate((1, -1, 1, 1, -1), 1):
        p += 0.01 * m
        rows.append(Transaction(float(i), p, "a"))
    write_transactions(tx, rows)
    out = tmp_path / "eta"
    assert main(["estimate-eta", str(tx), "--out", str(out)]) == 0
    got = _rows(out / "eta.csv")
    assert got[0] == ["side", "alpha", "eta_hat", "n_alt", "n_cont"]
    assert got[1][0] == "a" and float(got[1][2]) == pytest.approx(1 / 6)
    assert got[2][2] == ""
    assert main(["estimate-eta", str(tmp_path / "missing.csv"), "--out", str(out)]) == 1


def test_oracle_check(tmp_path, capsys):
    out = tmp_path / "oracle"
    assert main(["oracle-check", "--out", str(out)]) == 0
    report = json.loads((out / "oracle.json").read_text())
    assert report["pass"] and report["max_abs"] <= 1e-8
    assert "PASS" in capsys.readouterr().out


def test_fig2_is_fig1_minus_its_zero_penalty_column(tmp_path):
    reduced = [*FAST, "--set", "scan.mesh_div=4", "--set", "scan.alpha_a=0.005:0.0125:0.0025"]
    assert main(["figure", "fig1", "--out", str(tmp_path / "f1"), *reduced]) == 0
    assert main(["figure", "fig2", "--out", str(tmp_path / "f2"), *reduced]) == 0
    f1 = [[float(x) for x in r] for r in _rows(tmp_path / "f1" / "fig1.csv")[1:]]
    f2 = [[float(x) for x in r] for r in _rows(tmp_path / "f2" / "fig2.csv")[1:]]
    base = {r[0]: r for r in f1 if r[1] == 0.0}
    expected = [[r[0], r[1], r[2] - base[r[0]][2], r[3] - base[r[0]][3]]
                for r in f1 if r[1] != 0.0]
    assert sorted(base) == [0.005, 0.01, 0.0125]   # 0.0075 fails the on-grid filter
    assert f2 == expected


def test_fig7_summary(tmp_path):
    out = tmp_path / "f7"
    assert main(["figure", "fig7", "--out", str(out), *FAST, "--set", "scan.mesh_div=3",
                 "--set", "scan.alpha_b=0.02:0.03:0.005",
                 "--set", "scan.phi_minus=0,0.005"]) == 0
    s = json.loads((out / "fig7_summary.json").read_text())
    assert set(s) >= {"loss_reoptimized", "loss_kept", "argmax_alpha_b"}
    assert s["loss_reoptimized"] <= s["loss_kept"] + 1e-12


def test_appendix_branch_counts(tmp_path):
    out = tmp_path / "app"
    assert main(["figure", "appendix", "--out", str(out), *FAST]) == 0
    rows = _rows(out / "appendix.csv")
    assert rows[0][:2] == ["S", "n_branches"]
    counts = {int(r[1]) for r in rows[1:]}
    assert counts == {1, 2, 4}
    summary = json.loads((out / "appendix_summary.json").read_text())
    assert summary["branch_counts"] == [1, 2, 4]
    assert "alpha_b = 0.00625" in (out / "config.ini").read_text()
