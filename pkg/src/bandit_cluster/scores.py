"""Hypothesis scores, the alternative margin, gradients and stopping statistic."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels as kern
from .divergence import g_fn, kl, mixture
from .model import ClusteringProblem, Hypothesis, ModelError, ProblemInstance


def as_matrix(P) -> np.ndarray:
    """Arm pmfs as a ``K x |X|`` float array (instances or raw arrays)."""
    if isinstance(P, ProblemInstance):
        return P.matrix
    return np.asarray(P, dtype=float)


@dataclass(frozen=True)
class HypothesisTable:
    """Padded integer tables describing every hypothesis through its unique clusters."""

    members: np.ndarray
    sizes: np.ndarray
    hyp_clusters: np.ndarray
    hyp_ncl: np.ndarray

    @classmethod
    def build(cls, problem: ClusteringProblem) -> "HypothesisTable":
        cluster_ids: dict[tuple[int, ...], int] = {}
        per_hyp = []
        for h in problem.hypotheses:
            ids = []
            for c in h.clusters:
                ids.append(cluster_ids.setdefault(c, len(cluster_ids)))
            per_hyp.append(ids)
        clusters = list(cluster_ids)
        width = max(len(c) for c in clusters)
        members = np.full((len(clusters), width), -1, dtype=np.int64)
        for k, c in enumerate(clusters):
            members[k, : len(c)] = c
        sizes = np.array([len(c) for c in clusters], dtype=np.int64)
        m_width = max(len(ids) for ids in per_hyp)
        hyp_clusters = np.full((len(per_hyp), m_width), -1, dtype=np.int64)
        for k, ids in enumerate(per_hyp):
            hyp_clusters[k, : len(ids)] = ids
        hyp_ncl = np.array([len(ids) for ids in per_hyp], dtype=np.int64)
        return cls(members, sizes, hyp_clusters, hyp_ncl)

    @property
    def args(self) -> tuple[np.ndarray, ...]:
        return self.members, self.sizes, self.hyp_clusters, self.hyp_ncl


class ScoreBoard(NamedTuple):
    scores: np.ndarray
    argmin: int
    second_min: float


def score_g(P, w, sigma: Hypothesis) -> float:
    """Sum over the clusters of ``sigma`` of the weighted KL dispersion; unconstrained arms add nothing."""
    P = as_matrix(P)
    w = np.asarray(w, dtype=float)
    if w.shape != (P.shape[0],):
        raise ValueError("w needs one entry per arm")
    return float(sum(g_fn(P[list(c)], w[list(c)]) for c in sigma.clusters))


def score_board(P, w, problem: ClusteringProblem) -> ScoreBoard:
    """All hypothesis scores at once (compiled path)."""
    P = np.ascontiguousarray(as_matrix(P), dtype=float)
    w = np.ascontiguousarray(w, dtype=float)
    scores = kern.all_scores(P, w, *problem.table.args)
    best, _, second = kern.best_two(scores, -1)
    return ScoreBoard(scores, int(best), float(second))


def score_G(P, w, sigma: Hypothesis | int, problem: ClusteringProblem) -> tuple[float, int]:
    """Smallest score among hypotheses other than ``sigma``, with its index."""
    if len(problem) < 2:
        raise ModelError("the alternative margin needs at least two hypotheses")
    idx = sigma if isinstance(sigma, int) else problem.index(sigma)
    board = score_board(P, w, problem)
    _, alt, value = kern.best_two(board.scores, idx)
    return float(value), int(alt)


def grad_g(P, w, sigma: Hypothesis) -> np.ndarray:
    """Gradient in ``w``: entry ``i`` is ``D(P_i || W_m)`` for the cluster ``m`` holding ``i``.

    Unconstrained arms get 0. A cluster with zero total weight falls back to
    its equal-weight mixture.
    """
    P = as_matrix(P)
    w = np.asarray(w, dtype=float)
    out = np.zeros(P.shape[0])
    for c in sigma.clusters:
        idx = list(c)
        wc = w[idx] if w[idx].sum() > 0 else np.ones(len(idx))
        W = mixture(P[idx], wc)
        for i in idx:
            out[i] = kl(P[i], W)
    return out


def best_estimate(P_hat, w, problem: ClusteringProblem) -> int:
    """Index of the lowest-scoring hypothesis (canonical order breaks ties)."""
    return score_board(P_hat, w, problem).argmin


def z_statistic(t: int, P_hat, w, problem: ClusteringProblem) -> tuple[float, int]:
    """``t`` times the second-smallest score, and the current best hypothesis."""
    if t < 1:
        raise ValueError("t must be >= 1")
    board = score_board(P_hat, w, problem)
    return t * board.second_min, board.argmin


class LipschitzConstants(NamedTuple):
    L: float
    D: float
    E: float


def lipschitz_constants(P, problem: ClusteringProblem, sigma: Hypothesis | int) -> LipschitzConstants:
    """Smoothness constants of the alternative scores around instance ``P``.

    ``L`` bounds gradient entries, ``D/gamma`` the gradient's variation on
    allocations with all entries >= gamma, ``E`` the variation in ``P``.
    """
    M = as_matrix(P)
    p_min = float(M.min())
    if p_min <= 0:
        raise ModelError("constants need strictly positive arm pmfs")
    idx = sigma if isinstance(sigma, int) else problem.index(sigma)
    L = 0.0
    for k, h in enumerate(problem.hypotheses):
        if k == idx:
            continue
        for c in h.clusters:
            for i in c:
                for j in c:
                    if i != j:
                        L = max(L, kl(M[i], M[j]))
    X = M.shape[1]
    D = problem.max_cluster_size * X * (1.0 - p_min) / (4.0 * p_min)
    E = X * np.log((2.0 - p_min) / p_min)
    return LipschitzConstants(L, D, float(E))
