"""Compiled inner loops: cluster scores, gradients and the maximin LP.

Hypotheses are encoded as padded index tables (see ``scores.HypothesisTable``):
``members[c, :sizes[c]]`` are the arms of unique cluster ``c`` and
``hyp_clusters[h, :hyp_ncl[h]]`` the clusters of hypothesis ``h``.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

# Pivot tolerance on the normalized tableau.
_PIVOT_EPS = 1e-12


@njit(cache=True)
def cluster_values(P, w, members, sizes):
    nc = sizes.size
    X = P.shape[1]
    out = np.zeros(nc)
    W = np.empty(X)
    for c in range(nc):
        S = 0.0
        for k in range(sizes[c]):
            S += w[members[c, k]]
        if S <= 0.0:
            continue
        # normalize before mixing so tiny weights cannot underflow the mixture
        W[:] = 0.0
        for k in range(sizes[c]):
            i = members[c, k]
            wi = w[i] / S
            if wi > 0.0:
                for a in range(X):
                    W[a] += wi * P[i, a]
        val = 0.0
        for k in range(sizes[c]):
            i = members[c, k]
            wi = w[i]
            if wi > 0.0:
                s = 0.0
                for a in range(X):
                    p = P[i, a]
                    if p > 0.0:
                        s += p * math.log(p / W[a])
                val += wi * s
        out[c] = val if val > 0.0 else 0.0
    return out


@njit(cache=True)
def hypothesis_scores(cvals, hyp_clusters, hyp_ncl):
    nh = hyp_ncl.size
    out = np.zeros(nh)
    for h in range(nh):
        s = 0.0
        for m in range(hyp_ncl[h]):
            s += cvals[hyp_clusters[h, m]]
        out[h] = s
    return out


@njit(cache=True)
def all_scores(P, w, members, sizes, hyp_clusters, hyp_ncl):
    return hypothesis_scores(cluster_values(P, w, members, sizes), hyp_clusters, hyp_ncl)


@njit(cache=True)
def best_two(scores, exclude):
    """Argmin (lowest index on ties) and the smallest score at any other index.

    With ``exclude >= 0`` the argmin is fixed to ``exclude`` instead.
    """
    best = exclude
    if best < 0:
        best = 0
        for h in range(1, scores.size):
            if scores[h] < scores[best]:
                best = h
    second = np.inf
    alt = -1
    for h in range(scores.size):
        if h != best and scores[h] < second:
            second = scores[h]
            alt = h
    return best, alt, second


@njit(cache=True)
def cluster_gradients(P, w, members, sizes):
    """``D(P_i || W_c)`` for each member ``i`` of each cluster ``c``.

    A cluster with zero total weight uses its equal-weight mixture.
    """
    nc = sizes.size
    X = P.shape[1]
    out = np.zeros(members.shape)
    W = np.empty(X)
    for c in range(nc):
        S = 0.0
        for k in range(sizes[c]):
            S += w[members[c, k]]
        W[:] = 0.0
        for k in range(sizes[c]):
            i = members[c, k]
            wi = w[i] / S if S > 0.0 else 1.0 / sizes[c]
            for a in range(X):
                W[a] += wi * P[i, a]
        for k in range(sizes[c]):
            i = members[c, k]
            s = 0.0
            for a in range(X):
                p = P[i, a]
                if p > 0.0:
                    if W[a] <= 0.0:
                        s = np.inf
                        break
                    s += p * math.log(p / W[a])
            out[c, k] = s if s > 0.0 else 0.0
    return out


@njit(cache=True)
def hypothesis_gradient(cgrads, members, sizes, hyp_clusters, hyp_ncl, h, K):
    g = np.zeros(K)
    for m in range(hyp_ncl[h]):
        c = hyp_clusters[h, m]
        for k in range(sizes[c]):
            g[members[c, k]] = cgrads[c, k]
    return g


@njit(cache=True)
def solve_game(M, tol):
    """Row player's maximin strategy for payoff ``M`` (rows: arms, cols: hypotheses).

    Solves ``max sum(mu) s.t. A mu <= 1, mu >= 0`` on the shifted positive
    payoff ``A`` with Bland's rule; the row strategy is read from the duals.
    Returns ``(z, u)`` with ``u = min_j (z @ M)_j``.
    """
    K, B = M.shape
    z = np.zeros(K)
    if B == 1:
        k = 0
        for i in range(1, K):
            if M[i, 0] > M[k, 0]:
                k = i
        z[k] = 1.0
        return z, M[k, 0]
    scale = 0.0
    for i in range(K):
        for j in range(B):
            a = abs(M[i, j])
            if not np.isfinite(a):
                raise ValueError("non-finite payoff entry")
            if a > scale:
                scale = a
    if scale == 0.0:
        z[0] = 1.0
        return z, 0.0
    A = M / scale
    shift = 1.0 - A.min()
    ncol = B + K + 1
    T = np.zeros((K + 1, ncol))
    for i in range(K):
        for j in range(B):
            T[i, j] = A[i, j] + shift
        T[i, B + i] = 1.0
        T[i, ncol - 1] = 1.0
    for j in range(B):
        T[K, j] = -1.0
    basis = np.empty(K, dtype=np.int64)
    for i in range(K):
        basis[i] = B + i
    max_iter = 50 * (K + B) + 100
    done = False
    for _ in range(max_iter):
        enter = -1
        for j in range(B + K):
            if T[K, j] < -_PIVOT_EPS:
                enter = j
                break
        if enter < 0:
            done = True
            break
        leave = -1
        best_ratio = np.inf
        for i in range(K):
            if T[i, enter] > _PIVOT_EPS:
                ratio = T[i, ncol - 1] / T[i, enter]
                if leave < 0:
                    best_ratio = ratio
                    leave = i
                    continue
                slack = 1e-15 * max(1.0, best_ratio)
                if ratio < best_ratio - slack:
                    best_ratio = ratio
                    leave = i
                elif ratio <= best_ratio + slack and basis[i] < basis[leave]:
                    leave = i
        if leave < 0:
            raise ValueError("unbounded game LP")
        piv = T[leave, enter]
        for j in range(ncol):
            T[leave, j] /= piv
        for i in range(K + 1):
            if i != leave:
                f = T[i, enter]
                if f != 0.0:
                    for j in range(ncol):
                        T[i, j] -= f * T[leave, j]
        basis[leave] = enter
    if not done:
        raise ValueError("simplex iteration limit reached")
    total = 0.0
    for k in range(K):
        y = T[K, B + k]
        if y < 0.0:
            y = 0.0
        z[k] = y
        total += y
    if total <= 0.0:
        z[0] = 1.0
        total = 1.0
    z /= total
    u = np.inf
    for j in range(B):
        s = 0.0
        for k in range(K):
            s += z[k] * M[k, j]
        if s < u:
            u = s
    return z, u


@njit(cache=True)
def near_minimal_alternatives(scores, sigma_hat, r):
    """Indices ``h != sigma_hat`` with ``scores[h] < min_{h' != sigma_hat} scores[h'] + r``."""
    _, _, G = best_two(scores, sigma_hat)
    n = 0
    idx = np.empty(scores.size, dtype=np.int64)
    for h in range(scores.size):
        if h != sigma_hat and scores[h] < G + r:
            idx[n] = h
            n += 1
    return idx[:n], G


@njit(cache=True)
def game_payoff(P, x, active, members, sizes, hyp_clusters, hyp_ncl):
    K = x.size
    cg = cluster_gradients(P, x, members, sizes)
    M = np.empty((K, active.size))
    for b in range(active.size):
        g = hypothesis_gradient(cg, members, sizes, hyp_clusters, hyp_ncl, active[b], K)
        xg = 0.0
        for k in range(K):
            xg += x[k] * g[k]
        for k in range(K):
            M[k, b] = g[k] - xg
    return M


@njit(cache=True)
def fw_direction(P, x, r, sigma_hat, members, sizes, hyp_clusters, hyp_ncl, tol):
    """One maximin direction: returns ``(z, gap, G, n_active)``.

    ``gap`` is the game value ``max_z min_h <z - x, h>`` and ``G`` the
    smallest alternative score at ``x``.
    """
    scores = all_scores(P, x, members, sizes, hyp_clusters, hyp_ncl)
    active, G = near_minimal_alternatives(scores, sigma_hat, r)
    M = game_payoff(P, x, active, members, sizes, hyp_clusters, hyp_ncl)
    z, u = solve_game(M, tol)
    return z, u, G, active.size
