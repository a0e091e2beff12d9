"""Simulated bandit environment and full episodes for TaS-FW and the uniform baseline."""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from .model import ClusteringProblem, ModelError, ProblemInstance, instance_hypothesis
from .sampling import AlgorithmState, policy_step_tasfw, policy_step_uniform
from .stopping import ThresholdParams, threshold

ALGOS = ("tasfw", "uniform")
DEFAULT_CAP = 10_000_000


@dataclass(frozen=True)
class EpisodeResult:
    tau: int
    recommended: int
    correct: bool
    seed: int
    delta: float
    algo: str
    capped: bool
    wall_time: float
    Z: float = math.nan
    beta: float = math.nan

    def as_dict(self) -> dict:
        return asdict(self)


def episode_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent (observation noise, policy) generators derived from one 64-bit seed."""
    noise, policy = np.random.SeedSequence(int(seed) & (2**64 - 1)).spawn(2)
    return np.random.Generator(np.random.PCG64(noise)), np.random.Generator(np.random.PCG64(policy))


def _inverse_cdf(cdf_row: np.ndarray, u: float) -> int:
    sym = int(np.searchsorted(cdf_row, u, side="right"))
    return min(sym, cdf_row.size - 1)


def pull(P: ProblemInstance, arm: int, rng: np.random.Generator) -> int:
    """One observation from arm ``arm`` by inverse-CDF sampling."""
    if not 0 <= arm < P.K:
        raise ModelError(f"arm {arm} outside [0, {P.K})")
    return _inverse_cdf(np.cumsum(P.matrix[arm]), rng.random())


def run_episode(
    problem: ClusteringProblem,
    P: ProblemInstance,
    algo: str,
    delta: float,
    seed: int,
    cap: int = DEFAULT_CAP,
    truth: int | None = None,
    check_invariants: bool = False,
    log: list | None = None,
) -> EpisodeResult:
    """Pull each arm once, then sample by ``algo`` until the statistic crosses the threshold.

    ``check_invariants`` asserts the tracking and pull-floor guarantees at
    every TaS-FW step. ``log`` receives one ``(t, arm, symbol, sigma_hat, Z, beta)``
    tuple per pull; the last three are NaN-like (-1, nan, nan) before step K.
    """
    if algo not in ALGOS:
        raise ValueError(f"unknown algorithm {algo!r}; expected one of {ALGOS}")
    K = P.K
    if K != problem.K or P.alphabet_size != problem.alphabet_size:
        raise ModelError("instance shape does not match the problem")
    if cap < K:
        raise ValueError(f"cap={cap} is below the initial {K} pulls")
    if truth is None:
        truth = instance_hypothesis(P, problem)
    params = ThresholdParams.for_problem(problem, delta)
    noise_rng, policy_rng = episode_streams(seed)
    cdf = np.cumsum(P.matrix, axis=1)
    state = AlgorithmState(K, P.alphabet_size)
    tasfw = algo == "tasfw"
    start = time.perf_counter()
    beta = math.nan
    while True:
        if tasfw:
            arm, _ = policy_step_tasfw(state, problem)
        elif state.t < K:
            arm = state.t
        else:
            arm = policy_step_uniform(state, policy_rng)
        symbol = _inverse_cdf(cdf[arm], noise_rng.random())
        state.record(arm, symbol)
        t = state.t
        if t < K:
            if log is not None:
                log.append((t, arm, symbol, -1, math.nan, math.nan))
            continue
        state.refresh_estimate(problem)
        if check_invariants and tasfw:
            _check_tracking(state)
        beta = threshold(t, params)
        if log is not None:
            log.append((t, arm, symbol, state.sigma_hat, state.Z, beta))
        if state.Z >= beta or t >= cap:
            break
    capped = state.Z < beta
    return EpisodeResult(
        tau=state.t,
        recommended=state.sigma_hat,
        correct=state.sigma_hat == truth,
        seed=int(seed),
        delta=float(delta),
        algo=algo,
        capped=bool(capped),
        wall_time=time.perf_counter() - start,
        Z=float(state.Z),
        beta=float(beta),
    )


def _check_tracking(state: AlgorithmState) -> None:
    t, K = state.t, state.K
    gap = np.abs(state.N - state.cum_z).max()
    assert gap <= K - 1 + 1e-9, f"tracking gap {gap} > K-1 at t={t}"
    floor = math.sqrt(t) * math.log(t) / K - K + 1
    assert state.N.min() >= floor - 1e-9, f"pull floor violated at t={t}"
    assert abs(state.x_tilde.sum() - 1.0) < 1e-9
    # every forced step so far added 1/K to each target
    n_forced = math.ceil(math.sqrt(t + 1) * math.log(t + 1))
    assert state.x_tilde.min() >= n_forced / (K * t) - 1e-12
    assert np.allclose(state.x_tilde, state.cum_z / t, atol=1e-9)
