"""Stopping threshold and stop decision."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .model import ClusteringProblem

# zeta(2) - 1 = pi^2/6 - 1
ZETA2_MINUS_ONE = 0.64493406684822643647
LOG_ZETA2_MINUS_ONE = math.log(ZETA2_MINUS_ONE)


@dataclass(frozen=True)
class ThresholdParams:
    delta: float
    M: int
    alphabet_size: int
    k_tilde: int

    def __post_init__(self) -> None:
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.M < 1:
            raise ValueError("M must be >= 1")
        if self.alphabet_size < 2 or self.k_tilde < 2:
            raise ValueError("alphabet_size and k_tilde must be >= 2")

    @classmethod
    def for_problem(cls, problem: ClusteringProblem, delta: float) -> "ThresholdParams":
        # Variable cluster counts (n-ary problems) use the largest one.
        return cls(delta, problem.m_max, problem.alphabet_size, problem.k_tilde)

    @property
    def log_coef(self) -> int:
        return self.M * self.alphabet_size + self.k_tilde + 2


def k_tilde(problem: ClusteringProblem) -> int:
    """Largest number of clustered arms over all hypotheses."""
    return problem.k_tilde


def threshold(t: int, params: ThresholdParams) -> float:
    if t < 1:
        raise ValueError("t must be >= 1")
    return math.log(1.0 / params.delta) + params.log_coef * math.log(t + 1) + LOG_ZETA2_MINUS_ONE


def should_stop(Z: float, beta: float) -> bool:
    return Z >= beta
