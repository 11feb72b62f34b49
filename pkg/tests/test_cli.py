import json
import shutil

import pytest

from dirtygrid import cli, data
from dirtygrid.experiments import ExperimentConfig, run_discrepancy_report, run_validate


def test_parse_range_and_list():
    assert cli.parse_range("0:20:1") == tuple(float(i) for i in range(21))
    assert cli.parse_range("0.5:4:0.5") == tuple(0.5 * i for i in range(1, 9))
    assert cli.parse_range("1,2.5") == (1.0, 2.5)
    with pytest.raises(Exception):
        cli.parse_range("1:0:-1")


def test_fig2_run_directory(tmp_path, capsys):
    out = tmp_path / "run"
    code = cli.main(["fig2", "--out", str(out)])
    assert code == 0
    assert (out / "config.json").is_file() and (out / "report.json").is_file()
    names = sorted(p.name for p in (out / "curves").iterdir())
    assert names == sorted(f"{n}.csv" for n in data.FIG2_CURVES)
    text = (out / "curves" / "fig2_r1.csv").read_bytes()
    assert text.startswith(b"snr_db,rate_bits\n") and b"\r" not in text
    report = json.loads((out / "report.json").read_text())
    assert report["ok"] and report["regression"]["fig2_cbar"]["max_abs_delta"] < 1e-6
    cfg = json.loads((out / "config.json").read_text())
    assert cfg["delta0"] == 3.0 and cfg["inr_db"] == [5.0, 10.0, 20.0]
    # rerun is byte-identical
    out2 = tmp_path / "run2"
    cli.main(["fig2", "--out", str(out2)])
    for p in (out / "curves").iterdir():
        assert p.read_bytes() == (out2 / "curves" / p.name).read_bytes()
    assert "overall: ok" in capsys.readouterr().out


def test_fig2_literal_state_rule_fails_regression(tmp_path):
    assert cli.main(["fig2", "--state-rule", "above", "--inr-db", "5"]) == 1


def test_fig2_partial_grid(tmp_path):
    assert cli.main(["fig2", "--snr-db", "10:12:1", "--inr-db", "10"]) == 0


def test_data_dir_override(tmp_path, monkeypatch):
    for name in data.FIG2_CURVES:
        shutil.copy(data.curve_path(name), tmp_path / f"{name}.csv")
    bad = (tmp_path / "fig2_cbar.csv").read_text().replace("0,0.16", "0,0.26", 1)
    (tmp_path / "fig2_cbar.csv").write_text(bad)
    monkeypatch.setenv(data.ENV_VAR, str(tmp_path))
    assert data.data_dir() == tmp_path
    assert cli.main(["fig2", "--inr-db", "5"]) == 1


def test_fig3_small(tmp_path):
    out = tmp_path / "f3"
    code = cli.main(["fig3", "--delta0-list", "3,4", "--out", str(out)])
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["regression"]["ib_dpc_reference_delta0"]["ok"]
    header = (out / "curves" / "fig3_region_points.csv").read_text().splitlines()[0]
    assert header == "r1_bits,r2_bits,delta0,K,K1,is_hull_vertex"
    assert (out / "curves" / "ref_fig3_ob.csv").is_file()


def test_validate_default_passes():
    report = run_validate(ExperimentConfig(experiment="validate", samples=20_000, oracle_cases=4))
    assert report["ok"]
    assert all(g["status"] == "pass" for g in report["gates"])


def test_validate_small_samples_are_not_failures():
    report = run_validate(ExperimentConfig(experiment="validate", samples=100, oracle_cases=2))
    status = {g["name"]: g["status"] for g in report["gates"]}
    assert status["oracle.mixture_entropy"] == "insufficient-samples"
    assert status["scheme1.noise_variance"] == "insufficient-samples"
    assert status["scheme1.w0_uniform"] == "insufficient-samples"
    assert status["scheme1.x_independence"] == "insufficient-samples"
    assert "fail" not in status.values() and report["ok"]


def test_validate_coarse_tolerance_fails_oracle_only():
    report = run_validate(ExperimentConfig(experiment="validate", tol=1.0, samples=20_000, oracle_cases=3))
    status = {g["name"]: g["status"] for g in report["gates"]}
    assert status["entropy.sandwich"] == "pass"
    assert status["oracle.mixture_entropy"] == "fail"
    assert not report["ok"]
    assert cli.main(["validate", "--tol", "1", "--samples", "20000", "--oracle-cases", "2"]) == 1


def test_discrepancy_byte_stable(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["discrepancy", "--out", str(a)]) == 0
    assert cli.main(["discrepancy", "--out", str(b)]) == 0
    for name in ("report.json", "discrepancy.txt"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_discrepancy_content():
    rep = run_discrepancy_report(ExperimentConfig(experiment="discrepancy"))
    readings = rep["sections"]["fig2_r2_readings"]["max_abs_delta"]
    for inr in readings.values():
        assert inr["K=max,states=below"] < 1e-9
        assert inr["K=min,states=below"] > 1.0
    sets = rep["sections"]["fig3_state_sets"]["by_rule"]
    assert sets["subset"]["r2_max"] > sets["full"]["r2_max"]
    assert rep["sections"]["r1_forms"]["printed_k3_exceeds_cbar"]


def test_bad_parameter_exit_code(capsys):
    assert cli.main(["fig3", "--sigma2-ratio", "0.5", "--delta0-list", "4"]) == 2
    assert "error" in capsys.readouterr().err
