"""Frank-Wolfe maximin steps over near-active alternatives, and the offline hardness oracle."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as kern
from .divergence import binary_kl
from .model import ClusteringProblem, ModelError, ProblemInstance, instance_hypothesis
from .scores import as_matrix

log = logging.getLogger(__name__)

GAME_TOL = 1e-9
INTERIOR_FLOOR = 1e-12


@dataclass(frozen=True)
class GamePayoff:
    """Rows are arms, columns the near-active alternative hypotheses.

    Entry ``(k, j)`` is ``<e_k - x, grad g^{h_j}(x)>``.
    """

    matrix: np.ndarray
    columns: tuple[int, ...]


@dataclass(frozen=True)
class OracleResult:
    w_star: np.ndarray
    t_star: float
    iterations: int
    gap: float
    sigma: int

    @property
    def hardness(self) -> float:
        return 1.0 / self.t_star

    def to_json(self) -> dict:
        return {
            "t_star": self.t_star,
            "inv_t_star": self.hardness,
            "w_star": self.w_star.tolist(),
            "iterations": self.iterations,
            "gap": self.gap,
            "sigma": self.sigma,
        }


def _prep(P, x) -> tuple[np.ndarray, np.ndarray]:
    return (
        np.ascontiguousarray(as_matrix(P), dtype=float),
        np.ascontiguousarray(x, dtype=float),
    )


def subdiff_subspace(P, x, r: float, sigma_hat: int, problem: ClusteringProblem) -> list[tuple[int, np.ndarray]]:
    """Alternatives scoring within ``r`` of the best alternative at ``x``, with their gradients."""
    if r <= 0:
        raise ValueError("r must be positive")
    P, x = _prep(P, x)
    table = problem.table
    scores = kern.all_scores(P, x, *table.args)
    active, _ = kern.near_minimal_alternatives(scores, sigma_hat, r)
    cg = kern.cluster_gradients(P, x, table.members, table.sizes)
    return [
        (int(h), kern.hypothesis_gradient(cg, *table.args, h, P.shape[0]))
        for h in active
    ]


def game_payoff(P, x, r: float, sigma_hat: int, problem: ClusteringProblem) -> GamePayoff:
    P, x = _prep(P, x)
    table = problem.table
    scores = kern.all_scores(P, x, *table.args)
    active, _ = kern.near_minimal_alternatives(scores, sigma_hat, r)
    M = kern.game_payoff(P, x, active, *table.args)
    return GamePayoff(M, tuple(int(h) for h in active))


def solve_game(payoff: GamePayoff | np.ndarray, tol: float = GAME_TOL) -> tuple[np.ndarray, float]:
    """Maximin mixed strategy ``z`` over rows and the attained value ``u``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    M = payoff.matrix if isinstance(payoff, GamePayoff) else payoff
    M = np.ascontiguousarray(M, dtype=float)
    if M.ndim != 2 or M.shape[1] < 1:
        raise ValueError("payoff needs at least one column")
    if not np.all(np.isfinite(M)):
        raise ValueError("non-finite payoff entries")
    z, u = kern.solve_game(M, tol)
    return z, float(u)


def fws_step(P, x, r: float, sigma_hat: int, problem: ClusteringProblem, tol: float = GAME_TOL) -> np.ndarray:
    """Simplex point maximizing the worst linear gain over the near-active gradients."""
    if r <= 0:
        raise ValueError("r must be positive")
    P, x = _prep(P, x)
    z, _, _, _ = kern.fw_direction(P, x, r, sigma_hat, *problem.table.args, tol)
    return z


def solve_oracle(
    P: ProblemInstance,
    problem: ClusteringProblem,
    max_iters: int = 200_000,
    gap_tol: float = 1e-6,
    sigma: int | None = None,
    trace: list[float] | None = None,
) -> OracleResult:
    """Approximate ``max_w min_{h != sigma_P} g_P^h(w)`` by averaged Frank-Wolfe steps.

    Starts from the uniform allocation as iterate ``K`` and uses ``r_t = t^(-4/5)``.
    Stops once ``gap + r_t <= gap_tol`` or after ``max_iters`` steps and
    reports the best iterate seen. ``trace`` collects the best-so-far value.
    """
    M = np.ascontiguousarray(P.matrix, dtype=float)
    if M.min() <= 0:
        raise ModelError("the oracle needs strictly positive arm pmfs")
    if sigma is None:
        sigma = instance_hypothesis(P, problem)
    if len(problem) < 2:
        raise ModelError("the oracle needs at least two hypotheses")
    args = problem.table.args
    K = P.K
    x = np.full(K, 1.0 / K)
    best_val, best_x, gap = -math.inf, x.copy(), math.inf
    clamped = 0
    t0 = K
    it = 0
    for it in range(1, max_iters + 1):
        t = t0 + it
        if x.min() < INTERIOR_FLOOR:
            clamped += 1
            x = np.maximum(x, INTERIOR_FLOOR)
            x /= x.sum()
        r = t ** -0.8
        z, gap, G, _ = kern.fw_direction(M, x, r, sigma, *args, GAME_TOL)
        if G > best_val:
            best_val, best_x = G, x.copy()
        if trace is not None:
            trace.append(best_val)
        # gap + r bounds max_y G(y) - G(x) for an r-subgradient set
        if gap + r <= gap_tol:
            break
        x += (z - x) / t
    else:
        scores = kern.all_scores(M, x, *args)
        _, _, G = kern.best_two(scores, sigma)
        if G > best_val:
            best_val, best_x = G, x.copy()
    if clamped:
        log.info("oracle clamped %d iterates to the simplex interior", clamped)
    return OracleResult(best_x, float(best_val), it, float(gap), int(sigma))


def lower_bound(delta: float, t_star: float, loose: bool = False) -> float:
    """Expected-pull lower bound ``d(delta || 1 - delta) / T*``; ``loose`` gives ``log(1/(2.4 delta)) / T*``."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if t_star <= 0:
        raise ValueError("t_star must be positive")
    if loose:
        return math.log(1.0 / (2.4 * delta)) / t_star
    return binary_kl(delta, 1.0 - delta) / t_star
