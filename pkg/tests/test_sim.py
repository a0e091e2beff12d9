import math
from dataclasses import replace

import numpy as np
import pytest

from bandit_cluster.model import ModelError, ProblemInstance, gen_odd_arm
from bandit_cluster.scores import score_g
from bandit_cluster.sim import episode_streams, pull, run_episode
from bandit_cluster.stopping import ThresholdParams, threshold

from instances import CASES


def test_pull_point_mass():
    P = ProblemInstance.from_matrix([[1.0, 0.0, 0.0], [0.2, 0.3, 0.5]])
    rng = np.random.default_rng(0)
    assert all(pull(P, 0, rng) == 0 for _ in range(1000))


def test_pull_empirical_pmf():
    p = np.array([0.1, 0.1, 0.8])
    P = ProblemInstance.from_matrix([p, p])
    rng, _ = episode_streams(5)
    n = 100_000
    freq = np.bincount([pull(P, 0, rng) for _ in range(n)], minlength=3) / n
    assert np.all(np.abs(freq - p) <= 3 * np.sqrt(p * (1 - p) / n))


def test_pull_deterministic_and_checked():
    P = CASES["odd_arm"].P
    a, b = episode_streams(77)[0], episode_streams(77)[0]
    assert [pull(P, i % 7, a) for i in range(300)] == [pull(P, i % 7, b) for i in range(300)]
    with pytest.raises(ModelError):
        pull(P, 7, a)


def test_streams_are_distinct():
    noise, policy = episode_streams(1)
    assert noise.random() != policy.random()


def test_odd_arm_large_delta_always_correct():
    case = CASES["odd_arm"]
    results = [run_episode(case.problem, case.P, "tasfw", 0.1, s) for s in range(100)]
    assert all(r.correct and not r.capped for r in results)
    assert np.mean([r.tau for r in results]) < 1000


def test_separated_toy_stops_fast():
    P = ProblemInstance.from_matrix([[0.99, 0.01], [0.99, 0.01], [0.01, 0.99]])
    taus = [run_episode(gen_odd_arm(3, 2), P, "tasfw", 0.1, s).tau for s in range(20)]
    assert max(taus) < 100


@pytest.mark.parametrize("algo", ["tasfw", "uniform"])
def test_episode_deterministic(algo):
    case = CASES["nary_partition"]
    a = run_episode(case.problem, case.P, algo, 1e-3, 123)
    b = run_episode(case.problem, case.P, algo, 1e-3, 123)
    assert replace(a, wall_time=0.0) == replace(b, wall_time=0.0)


def test_episode_errors():
    case = CASES["odd_arm"]
    with pytest.raises(ValueError):
        run_episode(case.problem, case.P, "tasfw", 0.1, 0, cap=6)
    with pytest.raises(ValueError):
        run_episode(case.problem, case.P, "greedy", 0.1, 0)
    flat = ProblemInstance.from_matrix([[0.2, 0.3, 0.5]] * 7)
    with pytest.raises(ModelError):
        run_episode(case.problem, flat, "tasfw", 0.1, 0)


def test_capped_episode_flagged():
    case = CASES["matching_pairs_x3"]
    res = run_episode(case.problem, case.P, "tasfw", 1e-3, 0, cap=50)
    assert res.capped and res.tau == 50 and res.Z < res.beta


@pytest.mark.parametrize("algo", ["tasfw", "uniform"])
def test_replay_first_passage(case, algo):
    """Rebuild counts from the pull log; recheck stops at every step and scores on a subsample."""
    log = []
    res = run_episode(case.problem, case.P, algo, 1e-3, 4, log=log)
    K, X = case.P.K, case.P.alphabet_size
    params = ThresholdParams.for_problem(case.problem, 1e-3)
    assert [row[1] for row in log[:K]] == list(range(K))
    counts = np.zeros((K, X))
    checked = 0
    for t, arm, symbol, sigma_hat, Z, beta in log:
        counts[arm, symbol] += 1
        if t < K:
            continue
        assert beta == threshold(t, params)
        if t < res.tau:
            assert Z < beta
        if t % 37 == 0 or t > res.tau - 20:
            N = counts.sum(axis=1)
            w = N / t
            ref = sorted((score_g(counts / N[:, None], w, h), k) for k, h in enumerate(case.problem.hypotheses))
            assert ref[0][1] == sigma_hat
            assert Z == pytest.approx(t * ref[1][0], rel=1e-9, abs=1e-9)
            checked += 1
    assert log[-1][0] == res.tau and log[-1][4] >= log[-1][5]
    assert res.recommended == log[-1][3]
    assert checked >= 20
    assert not math.isnan(res.Z)
