"""Arm selection: forced exploration schedule, C-tracking, TaS-FW and uniform policies."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as kern
from .fw import GAME_TOL
from .model import ClusteringProblem


def _explore_level(t: int) -> int:
    return math.ceil(math.sqrt(t) * math.log(t))


def forced_index(t: int) -> bool:
    """True at the steps where the exploration level ceil(sqrt(t) ln t) is about to rise."""
    if t < 1:
        raise ValueError("t must be >= 1")
    return _explore_level(t) == _explore_level(t + 1) - 1


def forced_indices_upto(T: int) -> np.ndarray:
    """Boolean mask ``m`` with ``m[t-1] == forced_index(t)`` for t = 1..T."""
    t = np.arange(1, T + 2, dtype=float)
    level = np.ceil(np.sqrt(t) * np.log(t))
    return level[:-1] == level[1:] - 1


def ctrack_next(cum_z: np.ndarray, N_prev: np.ndarray) -> int:
    """Arm furthest behind its cumulative target (lowest index on ties)."""
    return int(np.argmax(np.asarray(cum_z) - np.asarray(N_prev)))


@dataclass
class AlgorithmState:
    """Mutable per-episode state.

    ``cum_z`` is the running sum of tracked targets; ``x_tilde`` their average.
    ``phat`` rows of unpulled arms are zero and carry zero weight.
    """

    K: int
    alphabet_size: int
    t: int = 0
    N: np.ndarray = field(init=False)
    counts: np.ndarray = field(init=False)
    phat: np.ndarray = field(init=False)
    cum_z: np.ndarray = field(init=False)
    x_tilde: np.ndarray = field(init=False)
    sigma_hat: int = -1
    Z: float = 0.0

    def __post_init__(self) -> None:
        self.N = np.zeros(self.K, dtype=np.int64)
        self.counts = np.zeros((self.K, self.alphabet_size), dtype=np.int64)
        self.phat = np.zeros((self.K, self.alphabet_size))
        self.cum_z = np.zeros(self.K)
        self.x_tilde = np.full(self.K, 1.0 / self.K)

    @property
    def w(self) -> np.ndarray:
        return self.N / max(self.t, 1)

    def record(self, arm: int, symbol: int) -> None:
        """Count one observation; ``t`` advances here."""
        self.t += 1
        self.N[arm] += 1
        self.counts[arm, symbol] += 1
        self.phat[arm] = self.counts[arm] / self.N[arm]

    def refresh_estimate(self, problem: ClusteringProblem) -> None:
        """Recompute the best hypothesis and the stopping statistic at the current step."""
        scores = kern.all_scores(self.phat, self.w, *problem.table.args)
        best, _, second = kern.best_two(scores, -1)
        self.sigma_hat = int(best)
        self.Z = self.t * float(second)


def policy_step_tasfw(state: AlgorithmState, problem: ClusteringProblem) -> tuple[int, np.ndarray]:
    """Choose the arm for step ``state.t + 1``; updates the tracked targets.

    Returns ``(arm, z)`` where ``z`` is this step's target.
    """
    t = state.t + 1
    K = state.K
    if t <= K:
        z = np.full(K, 1.0 / K)
        state.cum_z += z
        return t - 1, z
    if forced_index(t):
        z = np.full(K, 1.0 / K)
    else:
        z, _, _, _ = kern.fw_direction(
            state.phat, state.x_tilde, t ** -0.8, state.sigma_hat, *problem.table.args, GAME_TOL
        )
    state.x_tilde += (z - state.x_tilde) / t
    state.cum_z += z
    return ctrack_next(state.cum_z, state.N), z


def policy_step_uniform(state: AlgorithmState, rng: np.random.Generator) -> int:
    """Arm drawn uniformly from the episode's policy stream."""
    return int(rng.integers(state.K))
