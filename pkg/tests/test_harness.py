import json
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from bandit_cluster import cli
from bandit_cluster.divergence import binary_kl
from bandit_cluster.harness import (
    EPISODE_HEADER,
    SUMMARY_HEADER,
    SweepOutcome,
    SweepRow,
    diagnostics,
    export_csv,
    parse_config,
    read_episodes_csv,
    read_summary_csv,
    regress_slope,
    run_sweep,
)
from bandit_cluster.model import ModelError

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

ODD = {
    "name": "odd",
    "problem": {"kind": "odd-arm", "K": 7},
    "instance": {"alphabet_size": 3, "arms": [[0.1, 0.1, 0.8]] * 6 + [[0.6, 0.2, 0.2]]},
    "delta_grid": [0.1, 0.01],
    "trials": 4,
    "seed_base": 11,
    "oracle_iters": 5000,
}


@pytest.fixture(scope="module")
def small_sweep():
    return run_sweep(parse_config(ODD))


# --- config parsing ---

def test_shipped_config_parses():
    cfg = parse_config(CONFIGS / "matching_pairs_x3.json")
    assert cfg.problem.K == 6 and cfg.instance.alphabet_size == 3
    assert cfg.problem.hypotheses[0].M == 2
    assert cfg.problem.hypotheses[cfg.truth].clusters == ((0, 2), (1, 3))


@pytest.mark.parametrize("name", ["matching_pairs_x5", "odd_arm", "nary_partition", "smoke"])
def test_all_shipped_configs_parse(name):
    parse_config(CONFIGS / f"{name}.json")


@pytest.mark.parametrize(
    "patch",
    [{"delta_grid": [0.7]}, {"delta_grid": [1e-3, 1e-2]}, {"delta_grid": [0.1, 0.1]}, {"trials": 0},
     {"algos": ["greedy"]}, {"problem": {"kind": "odd-arm", "K": 6}}, {"cap": 3}],
)
def test_bad_configs(patch):
    with pytest.raises(ValueError):
        parse_config({**ODD, **patch})


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ModelError, match="absent.json"):
        parse_config({**ODD, "instance": str(tmp_path / "absent.json")})
    with pytest.raises(ModelError, match="nope.json"):
        parse_config(tmp_path / "nope.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ModelError):
        parse_config(bad)
    with pytest.raises(ModelError):
        parse_config({"problem": ODD["problem"]})


def test_alphabet_cross_check():
    with pytest.raises(ModelError):
        parse_config({**ODD, "problem": {"kind": "odd-arm", "K": 7, "alphabet_size": 2}})


def test_instance_path_relative_to_config(tmp_path):
    (tmp_path / "inst.json").write_text(json.dumps(ODD["instance"]))
    (tmp_path / "cfg.json").write_text(json.dumps({**ODD, "instance": "inst.json"}))
    assert parse_config(tmp_path / "cfg.json").instance.K == 7


def test_seed_env_override(monkeypatch):
    monkeypatch.setenv("BC_SEED", "99")
    assert parse_config(ODD).seed_base == 99
    assert parse_config(ODD, seed_override=5).seed_base == 5


def test_degenerate_instance_rejected():
    with pytest.raises(ModelError):
        parse_config({**ODD, "instance": {"arms": [[0.2, 0.3, 0.5]] * 7}})


# --- sweeps ---

def test_sweep_rows(small_sweep):
    res = small_sweep
    assert [(r.delta, r.algo) for r in res.rows] == [
        (0.1, "tasfw"), (0.1, "uniform"), (0.01, "tasfw"), (0.01, "uniform")]
    keys = [(e.delta, e.algo, e.seed) for e in res.episodes]
    assert keys == [(d, a, s) for d in (0.1, 0.01) for a in ("tasfw", "uniform") for s in range(11, 15)]
    for r in res.rows:
        assert 0 <= r.error_rate <= 1 and r.mean_tau >= 7
        assert r.d_bernoulli == binary_kl(r.delta, 1 - r.delta)
        assert r.lower_bound == pytest.approx(r.d_bernoulli * res.oracle.hardness)
        assert r.mean_tau + 3 * r.std_tau / np.sqrt(r.n_trials) >= r.lower_bound
    assert res.exit_code() == 0


def test_single_trial_std_zero():
    res = run_sweep(parse_config({**ODD, "trials": 1, "algos": ["tasfw"]}))
    assert all(r.std_tau == 0.0 and r.n_trials == 1 for r in res.rows)


def test_parallel_matches_serial(small_sweep):
    par = run_sweep(small_sweep.config, threads=2, oracle=small_sweep.oracle)
    assert par.rows == small_sweep.rows
    strip = lambda eps: [replace(e, wall_time=0.0) for e in eps]  # noqa: E731
    assert strip(par.episodes) == strip(small_sweep.episodes)


def test_capped_sweep_exit_code():
    res = run_sweep(parse_config({**ODD, "cap": 20, "trials": 2}))
    assert res.n_capped == 8 and res.exit_code() == 2


def test_error_rate_exit_code(small_sweep):
    bad = SweepRow(0.01, "tasfw", 10, 100.0, 1.0, 0.1, 4.5, 20.0)
    res = SweepOutcome(small_sweep.config, small_sweep.oracle, [bad], [])
    assert res.exit_code() == 3


# --- regression ---

def _row(delta, mean):
    return SweepRow(delta, "tasfw", 1, mean, 0.0, 0.0, binary_kl(delta, 1 - delta), 0.0)


def test_regression_recovers_line():
    rows = [_row(d, 7 * binary_kl(d, 1 - d) + 3) for d in (1e-2, 1e-3, 1e-5)]
    slope, icpt = regress_slope(rows)
    assert slope == pytest.approx(7, rel=1e-12) and icpt == pytest.approx(3, rel=1e-10)


def test_regression_needs_two_deltas():
    with pytest.raises(ValueError):
        regress_slope([_row(1e-3, 10.0), _row(1e-3, 11.0)])


# --- CSV ---

def test_export_empty(tmp_path):
    s, e = export_csv([], [], tmp_path)
    assert s.read_text() == ",".join(SUMMARY_HEADER) + "\n"
    assert e.read_text() == ",".join(EPISODE_HEADER) + "\n"


def test_export_roundtrip(tmp_path, small_sweep):
    s, e = export_csv(small_sweep.rows, small_sweep.episodes, tmp_path)
    assert b"\r" not in s.read_bytes()
    back = read_summary_csv(s)
    for a, b in zip(back, small_sweep.rows):
        for k in SUMMARY_HEADER:
            va, vb = getattr(a, k), getattr(b, k)
            assert va == vb if isinstance(vb, (str, int)) else va == pytest.approx(vb, rel=1e-11)
    # values with at most 12 significant digits survive the text format exactly
    exact = [SweepRow(1e-3, "tasfw", 100, 1234.5, 12.25, 0.0, 6.875, 151.125),
             SweepRow(1e-4, "uniform", 100, 2000.25, 30.5, 0.01, 9.1875, 200.0625)]
    s2, _ = export_csv(exact, [], tmp_path / "x")
    assert read_summary_csv(s2) == exact


def test_summary_recomputable_from_episodes(tmp_path, small_sweep):
    s, e = export_csv(small_sweep.rows, small_sweep.episodes, tmp_path)
    eps = read_episodes_csv(e)
    for r in read_summary_csv(s):
        taus = np.array([x["tau"] for x in eps if x["delta"] == r.delta and x["algo"] == r.algo], float)
        assert abs(taus.mean() - r.mean_tau) <= 1e-9 * max(1.0, r.mean_tau)
        assert abs(taus.std(ddof=1) - r.std_tau) <= 1e-9 * max(1.0, r.std_tau)


def test_rerun_is_byte_identical(tmp_path, small_sweep):
    again = run_sweep(small_sweep.config)
    a = export_csv(small_sweep.rows, small_sweep.episodes, tmp_path / "a")
    b = export_csv(again.rows, again.episodes, tmp_path / "b")
    for x, y in zip(a, b):
        assert x.read_bytes() == y.read_bytes()


# --- diagnostics ---

def test_diagnostics_report():
    cfg = parse_config(ODD)
    rep = diagnostics(cfg, fd_points=2)
    for key in ("L", "D", "E", "p_min", "k_tilde", "n_hypotheses", "t_star", "inv_t_star", "w_star",
                "gradient_fd_max_rel_err"):
        assert key in rep
    assert rep["n_hypotheses"] == 7 and rep["k_tilde"] == 6
    assert rep["inv_t_star"] == pytest.approx(5.3887, rel=1e-3)
    assert rep["gradient_fd_max_rel_err"] <= 1e-6


# --- CLI ---

def _write_cfg(tmp_path, **patch):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({**ODD, **patch}))
    return str(path)


def test_cli_gen_problem(capsys):
    assert cli.main(["gen-problem", "--kind", "nary", "--K", "6", "--N", "3"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["n_hypotheses"] == 90 and len(out["hypotheses"]) == 90


def test_cli_oracle(tmp_path, capsys):
    assert cli.main(["oracle", "--config", _write_cfg(tmp_path)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert set(out) >= {"t_star", "inv_t_star", "w_star", "iterations", "gap"}


def test_cli_sweep_and_exit_codes(tmp_path, capsys):
    out_dir = tmp_path / "out"
    assert cli.main(["sweep", "--config", _write_cfg(tmp_path, trials=2), "--out", str(out_dir)]) == 0
    assert (out_dir / "odd_summary.csv").exists() and (out_dir / "odd_episodes.csv").exists()
    assert cli.main(["sweep", "--config", _write_cfg(tmp_path, trials=2, cap=20), "--out", str(out_dir)]) == 2
    assert cli.main(["sweep", "--config", str(tmp_path / "missing.json")]) == 1
    assert "missing.json" in capsys.readouterr().err


def test_cli_diagnostics(tmp_path, capsys):
    assert cli.main(["diagnostics", "--config", _write_cfg(tmp_path)]) == 0
    assert "gradient_fd_max_rel_err" in json.loads(capsys.readouterr().out)
