"""KL-type divergences on finite alphabets, in nats.

``0 log 0`` and ``0 log(0/0)`` are taken as 0 explicitly; a positive mass
against a zero reference gives ``inf``.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .model import Categorical


def _as_array(p) -> np.ndarray:
    if isinstance(p, Categorical):
        return p.probs
    return np.asarray(p, dtype=float)


def kl(p, q) -> float:
    p, q = _as_array(p), _as_array(q)
    if p.shape != q.shape:
        raise ValueError(f"alphabet mismatch: {p.shape} vs {q.shape}")
    support = p > 0
    if np.any(q[support] <= 0):
        return math.inf
    ps, qs = p[support], q[support]
    return max(float(np.sum(ps * np.log(ps / qs))), 0.0)


def binary_kl(p: float, q: float) -> float:
    """d(p||q) between Bernoulli(p) and Bernoulli(q)."""
    total = 0.0
    for a, b in ((p, q), (1.0 - p, 1.0 - q)):
        if a > 0:
            if b <= 0:
                return math.inf
            total += a * math.log(a / b)
    return max(total, 0.0)


def entropy(p) -> float:
    p = _as_array(p)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))


def mixture(ps: Sequence, ws) -> np.ndarray:
    """Weighted average ``sum w_i P_i / sum w_i``; the unique minimizer of ``sum w_i D(P_i||Q)``."""
    P = np.vstack([_as_array(p) for p in ps])
    w = np.asarray(ws, dtype=float)
    if w.shape != (P.shape[0],):
        raise ValueError("one weight per distribution required")
    s = w.sum()
    if s <= 0:
        raise ValueError("mixture needs a positive total weight")
    return (w / s) @ P


def g_fn(ps: Sequence, ws) -> float:
    """Weighted KL dispersion of ``ps`` around their ``ws``-mixture.

    Zero when all weights vanish. Members with zero weight drop out, so the
    value is always finite.
    """
    w = np.asarray(ws, dtype=float)
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    if not np.any(w > 0):
        return 0.0
    P = np.vstack([_as_array(p) for p in ps])
    active = w > 0
    W = mixture(P[active], w[active])
    return float(sum(wi * kl(pi, W) for wi, pi in zip(w[active], P[active])))


def gjs(p1, p2, alpha: float) -> float:
    """Generalized Jensen-Shannon divergence with mixing ratio ``alpha``."""
    p1, p2 = _as_array(p1), _as_array(p2)
    m = (alpha * p1 + p2) / (1.0 + alpha)
    return alpha * kl(p1, m) + kl(p2, m)


def gllr_numerator_check(counts: Sequence[Sequence[int]]) -> float:
    """Normalized generalized log-likelihood ratio of separate vs pooled fits.

    ``(1/N) log [max prod_i P_i^{n_i}(x_i) / max P^N(x)]`` evaluated through
    entropies of the empirical distributions.
    """
    C = np.asarray(counts, dtype=float)
    if C.ndim != 2 or C.shape[0] < 2:
        raise ValueError("need at least two count vectors")
    n = C.sum(axis=1)
    if np.any(n <= 0):
        raise ValueError("every sequence must be nonempty")
    N = n.sum()
    separate = -sum(ni * entropy(ci / ni) for ci, ni in zip(C, n))
    pooled = -N * entropy(C.sum(axis=0) / N)
    return float((separate - pooled) / N)
