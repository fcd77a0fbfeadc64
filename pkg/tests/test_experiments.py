import csv
import json

import numpy as np
import pytest

import qkrylov as q
from qkrylov.cli import main
from qkrylov.experiments import (
    EpsilonRule,
    SweepConfig,
    converged_errors,
    emit_outputs,
    fit_monomial,
    prepare_model,
    run_sweep,
    summarize,
)
from qkrylov.experiments.sweep import CSV_COLUMNS, SweepRow, pooled_sign_medians

SMALL = dict(sigmas=(1e-5, 1e-3), d_max=4, trials=8, converged_window=(2, 4))


def synthetic_row(sigma, d, errors):
    e = np.asarray(errors, float)
    nan = float("nan")
    return SweepRow(sigma, d, 2 * d + 1, 0.1, len(e), nan, nan, nan, nan, nan, nan, nan, nan, nan,
                    nan, 1.0, 2.0, True, 0, 0, 0, 0, 0, errors=e, lowers=-np.ones_like(e), chis=0.5 * np.ones_like(e))


def test_epsilon_rule_parse():
    assert EpsilonRule.parse("standard").epsilon(71, 1e-3) == pytest.approx(7.1e-3)
    assert EpsilonRule.parse("scaled:0.5").epsilon(11, 1e-4) == pytest.approx(5.5e-4)
    assert EpsilonRule.parse("fixed:1e-3").epsilon(99, 1.0) == 1e-3
    assert EpsilonRule.parse({"fixed": 2e-3}).value == 2e-3
    for bad in ("median", "fixed:x", "fixed:-1", {"a": 1, "b": 2}):
        with pytest.raises(q.ConfigError):
            EpsilonRule.parse(bad)


def test_config_defaults_and_roundtrip(tmp_path):
    cfg = SweepConfig()
    assert cfg.sigmas == (1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3)
    assert list(cfg.ds) == list(range(1, 36))
    assert cfg.converged_window == (26, 35)
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg.to_json()))
    assert SweepConfig.load(path) == cfg


def test_config_nested_lattice():
    cfg = SweepConfig.from_dict({"lattice": {"rows": 2, "cols": 3, "boundary": "periodic"}, "epsilon_rule": "fixed:1e-4"})
    assert (cfg.rows, cfg.cols, cfg.boundary) == (2, 3, "periodic")
    assert cfg.epsilon_rule == EpsilonRule("fixed", 1e-4)


@pytest.mark.parametrize("data", [
    {"sigmas": []}, {"sigmas": [-1.0]}, {"trials": 0}, {"d_max": 3}, {"bogus": 1},
    {"dt": -0.1}, {"rows": 0}, {"converged_window": [1, 2, 3]},
])
def test_config_errors(data):
    with pytest.raises(q.ConfigError):
        SweepConfig.from_dict(data)


def test_config_load_errors(tmp_path):
    with pytest.raises(q.ConfigError):
        SweepConfig.load(tmp_path / "missing.json")
    (tmp_path / "x.json").write_text("[1, 2]")
    with pytest.raises(q.ConfigError):
        SweepConfig.load(tmp_path / "x.json")


def test_overrides():
    cfg = SweepConfig().with_overrides(sigmas=[1e-3], d_max=10, trials=3, epsilon_rule="scaled:1", sector=False, out_dir=None)
    assert cfg.sigmas == (1e-3,) and cfg.d_max == 10 and cfg.converged_window == (10, 10)
    assert cfg.epsilon_rule.kind == "scaled" and not cfg.sector and cfg.out_dir == "out"


def test_pooled_sign_medians():
    assert pooled_sign_medians([1, 2, 3, -1]) == (2, -1)
    assert pooled_sign_medians([1.0, 2.0]) == (1.5, None)
    assert pooled_sign_medians([]) == (None, None)


def test_converged_errors_pools_window():
    rows = [synthetic_row(1e-3, 1, [100.0]), synthetic_row(1e-3, 2, [1.0, -1.0]), synthetic_row(1e-3, 3, [2.0, 3.0])]
    (s,) = converged_errors(rows, (2, 3))
    assert s.posMedian == 2 and s.negMedian == -1 and s.nPos == 3 and s.nNeg == 1
    assert s.absMedian == pytest.approx(1.5)
    assert s.lowerMagnitude == 1 and s.chiMedian == 0.5 and s.upperBound == 1.0


def test_converged_errors_missing_sign():
    (s,) = converged_errors([synthetic_row(1e-4, 2, [1.0, 2.0])], (1, 5))
    assert np.isnan(s.negMedian) and s.nNeg == 0 and not s.has_neg and s.has_pos


def test_fit_monomial_examples():
    k, c = fit_monomial([(s, 3 * s) for s in (1e-6, 1e-4, 1e-2)])
    assert k == pytest.approx(1.0) and c == pytest.approx(3.0)
    k, _ = fit_monomial([(s, s**2) for s in (1e-3, 1e-2, 1e-1)])
    assert k == pytest.approx(2.0)
    with pytest.raises(q.PreconditionError):
        fit_monomial([(1e-3, 1.0)])
    with pytest.raises(q.PreconditionError):
        fit_monomial([(1e-3, 1.0), (1e-2, -1.0)])


def test_summarize_fits_both_signs():
    rows = [synthetic_row(s, 3, [5 * s, -2 * s**2]) for s in (1e-6, 1e-5, 1e-4)]
    stats, fits = summarize(rows, (1, 3))
    assert fits["positive"]["exponent"] == pytest.approx(1.0)
    assert fits["positive"]["coefficient"] == pytest.approx(5.0)
    assert fits["negative_abs"]["exponent"] == pytest.approx(2.0)
    assert len(stats) == 3


def test_empty_outputs_are_headers_only(tmp_path):
    paths = emit_outputs([], [], {}, SweepConfig(), None, tmp_path)
    assert (tmp_path / "sweep.csv").read_text() == ",".join(CSV_COLUMNS) + "\n"
    assert (tmp_path / "converged.csv").read_text().count("\n") == 1
    assert not any(p.suffix == ".svg" for p in paths)


@pytest.fixture(scope="module")
def small_run():
    cfg = SweepConfig(**SMALL)
    model = prepare_model(cfg)
    return cfg, model, run_sweep(cfg, model)


def test_small_sweep_rows(small_run):
    cfg, model, rows = small_run
    assert [(r.sigma, r.d) for r in rows] == [(s, d) for s in cfg.sigmas for d in range(1, 5)]
    for r in rows:
        assert r.D == 2 * r.d + 1 and r.trials == 8
        assert r.epsilon == pytest.approx(0.1 * r.D * r.sigma)
        assert len(r.errors) == 8 - r.failedTrials
        assert r.upperViolations == 0 and r.lowerViolations == 0


def test_sweep_is_deterministic(small_run, tmp_path):
    cfg, model, rows = small_run
    again = run_sweep(cfg, model)
    for a, b in zip(rows, again):
        np.testing.assert_array_equal(a.errors, b.errors)
    stats, fits = summarize(rows, cfg.converged_window)
    emit_outputs(rows, stats, fits, cfg, model, tmp_path / "a")
    stats2, fits2 = summarize(again, cfg.converged_window)
    emit_outputs(again, stats2, fits2, cfg, model, tmp_path / "b")
    for name in ("sweep.csv", "converged.csv", "config.json", "fit.json", "energy_vs_d.svg", "converged_vs_sigma.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_parallel_matches_serial(small_run):
    cfg, model, rows = small_run
    par = run_sweep(SweepConfig(**SMALL, workers=2), model)
    for a, b in zip(rows, par):
        np.testing.assert_array_equal(a.errors, b.errors)


def test_csv_round_trip(small_run, tmp_path):
    cfg, model, rows = small_run
    stats, fits = summarize(rows, cfg.converged_window)
    emit_outputs(rows, stats, fits, cfg, model, tmp_path)
    with open(tmp_path / "sweep.csv") as fh:
        recs = list(csv.DictReader(fh))
    assert list(recs[0]) == CSV_COLUMNS
    assert float(recs[0]["medianEnergy"]) == rows[0].medianEnergy
    assert recs[0]["boundAssumptionsOk"] in ("true", "false")
    cfgj = json.loads((tmp_path / "config.json").read_text())
    assert cfgj["dt"] == model.dt and "seed_rule" in cfgj and "noise_convention" in cfgj


def test_median_stability_across_seeds():
    base = SweepConfig(sigmas=(1e-4,), d_min=20, d_max=20, trials=200, converged_window=(20, 20))
    model = prepare_model(base)
    meds = [run_sweep(base.with_overrides(master_seed=s), model)[0].medianAbsError for s in (1, 2)]
    assert abs(meds[0] - meds[1]) / np.mean(meds) < 0.25


def test_cli_sweep_and_outputs(tmp_path, capsys):
    rc = main(["sweep", "--sigma", "1e-4", "--d-max", "3", "--trials", "4", "--out", str(tmp_path)])
    assert rc == 0
    assert "bound violations: 0" in capsys.readouterr().out
    assert (tmp_path / "sweep.csv").exists() and (tmp_path / "abs_error_vs_d.svg").exists()


def test_cli_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"lattice": {"rows": 2, "cols": 2}, "sigmas": [1e-3], "d_max": 2,
                               "trials": 3, "converged_window": [1, 2]}))
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "o"), "--no-sector", "--dt", "0.2"]) == 0
    saved = json.loads((tmp_path / "o" / "config.json").read_text())
    assert saved["config"]["rows"] == 2 and saved["config"]["sector"] is False and saved["dt"] == 0.2


def test_cli_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["sweep", "--config", str(bad)]) == 2
    assert main(["sweep", "--trials", "0", "--out", str(tmp_path)]) == 2
    assert main(["sweep", "--epsilon-rule", "nope", "--out", str(tmp_path)]) == 2
    big = tmp_path / "big.json"
    big.write_text(json.dumps({"rows": 4, "cols": 4}))
    assert main(["sweep", "--config", str(big), "--out", str(tmp_path)]) == 3
    assert "capacity" in capsys.readouterr().err


def test_cli_model_and_pencil(tmp_path, capsys):
    assert main(["model"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["dim"] == 126 and out["gamma0sq"] == pytest.approx(0.2753, abs=1e-3)
    assert main(["pencil", "-d", "2", "--format", "csv", "-o", str(tmp_path / "p.csv")]) == 0
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "matrix,row,col,real,imag" and len(lines) == 51
    assert main(["pencil", "-d", "1"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["D"] == 3


def test_cli_bounds(capsys):
    args = ["bounds", "--dH", "1e-6", "--dS", "1e-7", "--h-norm", "19.2", "--epsilon", "1e-6",
            "-d", "30", "--gamma0sq", "0.275", "--gap", "3.96"]
    assert main(args) == 0
    row = json.loads(capsys.readouterr().out)
    assert row["ok_a_ii"] and row["upperOptimal"] <= row["upperGapChoice"]
