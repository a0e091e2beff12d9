"""Arm models, hypotheses and the three example clustering problems.

Arms are 0-indexed everywhere in this package.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

PROB_ATOL = 1e-12


class ModelError(ValueError):
    """Raised for malformed instances, hypotheses or problems."""


@dataclass(frozen=True)
class Categorical:
    probs: np.ndarray

    def __post_init__(self) -> None:
        p = np.array(self.probs, dtype=float)
        if p.ndim != 1 or p.size < 2:
            raise ModelError("a categorical needs an alphabet of size >= 2")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ModelError(f"negative or non-finite probabilities: {p}")
        if abs(p.sum() - 1.0) > PROB_ATOL:
            raise ModelError(f"probabilities sum to {p.sum()!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def alphabet_size(self) -> int:
        return self.probs.size


@dataclass(frozen=True)
class ProblemInstance:
    """K arm distributions on a shared finite alphabet."""

    arms: tuple[Categorical, ...]

    def __post_init__(self) -> None:
        arms = tuple(a if isinstance(a, Categorical) else Categorical(a) for a in self.arms)
        if len(arms) < 2:
            raise ModelError("an instance needs at least 2 arms")
        sizes = {a.alphabet_size for a in arms}
        if len(sizes) != 1:
            raise ModelError(f"arms disagree on alphabet size: {sorted(sizes)}")
        object.__setattr__(self, "arms", arms)

    @classmethod
    def from_matrix(cls, rows: Iterable[Sequence[float]]) -> "ProblemInstance":
        return cls(tuple(Categorical(np.asarray(r, dtype=float)) for r in rows))

    @property
    def K(self) -> int:
        return len(self.arms)

    @property
    def alphabet_size(self) -> int:
        return self.arms[0].alphabet_size

    @cached_property
    def matrix(self) -> np.ndarray:
        m = np.vstack([a.probs for a in self.arms])
        m.setflags(write=False)
        return m

    @property
    def p_min(self) -> float:
        return float(self.matrix.min())

    def to_json(self) -> dict:
        return {"alphabet_size": self.alphabet_size, "arms": self.matrix.tolist()}


@dataclass(frozen=True, order=True)
class Hypothesis:
    """Clusters of arms asserted equal; arms outside every cluster are unconstrained.

    Build through :func:`make_hypothesis`, which canonicalizes and validates.
    Ordering is lexicographic on the canonical cluster tuple.
    """

    clusters: tuple[tuple[int, ...], ...]
    K: int = field(compare=False)

    @property
    def M(self) -> int:
        return len(self.clusters)

    @cached_property
    def clustered(self) -> frozenset[int]:
        return frozenset(i for c in self.clusters for i in c)

    @cached_property
    def unconstrained(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.K) if i not in self.clustered)

    def cluster_of(self, arm: int) -> int | None:
        for m, c in enumerate(self.clusters):
            if arm in c:
                return m
        return None

    def conforms(self, P: np.ndarray, tol: float = 1e-9) -> bool:
        """Within-cluster arms equal and arms of different groups distinct, in sup norm."""
        groups = [list(c) for c in self.clusters] + [[i] for i in self.unconstrained]
        for c in self.clusters:
            if np.abs(P[list(c)] - P[c[0]]).max() > tol:
                return False
        for g1, g2 in itertools.combinations(groups, 2):
            for i in g1:
                for j in g2:
                    if np.abs(P[i] - P[j]).max() <= tol:
                        return False
        return True

    def __str__(self) -> str:
        return "{" + ", ".join("{" + ",".join(map(str, c)) + "}" for c in self.clusters) + "}"


def make_hypothesis(clusters: Iterable[Iterable[int]], K: int) -> Hypothesis:
    if K < 2:
        raise ModelError("K must be >= 2")
    canon = []
    seen: set[int] = set()
    for c in clusters:
        raw = [int(i) for i in c]
        members = sorted(set(raw))
        if len(members) != len(raw):
            raise ModelError(f"repeated arm inside cluster {raw}")
        if len(members) < 2:
            raise ModelError(f"cluster {members} has fewer than 2 arms")
        for i in members:
            if not 0 <= i < K:
                raise ModelError(f"arm index {i} outside [0, {K})")
            if i in seen:
                raise ModelError(f"arm {i} appears in more than one cluster")
            seen.add(i)
        canon.append(tuple(members))
    canon.sort(key=lambda c: c[0])
    return Hypothesis(tuple(canon), K)


def dominates(a: Hypothesis, b: Hypothesis) -> bool:
    """True iff each cluster of ``a`` sits inside some cluster of ``b``."""
    if a.K != b.K:
        raise ModelError("hypotheses defined on different arm counts")
    b_sets = [set(c) for c in b.clusters]
    return all(any(set(c) <= s for s in b_sets) for c in a.clusters)


@dataclass(frozen=True)
class ClusteringProblem:
    K: int
    alphabet_size: int
    hypotheses: tuple[Hypothesis, ...]
    kind: str = "explicit"

    def __post_init__(self) -> None:
        hyps = tuple(sorted(self.hypotheses))
        if not hyps:
            raise ModelError("a problem needs at least one hypothesis")
        if any(h.K != self.K for h in hyps):
            raise ModelError("hypothesis arm count differs from problem K")
        if len(set(hyps)) != len(hyps):
            raise ModelError("duplicate hypotheses")
        if self.alphabet_size < 2:
            raise ModelError("alphabet size must be >= 2")
        object.__setattr__(self, "hypotheses", hyps)

    def __len__(self) -> int:
        return len(self.hypotheses)

    @property
    def m_max(self) -> int:
        return max(h.M for h in self.hypotheses)

    @property
    def k_tilde(self) -> int:
        return max(len(h.clustered) for h in self.hypotheses)

    @property
    def max_cluster_size(self) -> int:
        return max(len(c) for h in self.hypotheses for c in h.clusters)

    def index(self, hyp: Hypothesis) -> int:
        return self.hypotheses.index(hyp)

    def with_alphabet(self, alphabet_size: int) -> "ClusteringProblem":
        return ClusteringProblem(self.K, alphabet_size, self.hypotheses, self.kind)

    @cached_property
    def table(self):
        from .scores import HypothesisTable

        return HypothesisTable.build(self)


def validate_assumption1(problem: ClusteringProblem) -> list[tuple[int, int]]:
    """Ordered index pairs (a, b), a != b, where hypothesis a dominates b.

    An empty list means no distinct pair violates the non-domination condition.
    """
    hyps = problem.hypotheses
    return [
        (a, b)
        for a, b in itertools.permutations(range(len(hyps)), 2)
        if dominates(hyps[a], hyps[b])
    ]


def instance_hypothesis(P: ProblemInstance, problem: ClusteringProblem, tol: float = 1e-9) -> int:
    """Index of the unique hypothesis the instance conforms to."""
    if tol < 0:
        raise ModelError("tol must be >= 0")
    if P.K != problem.K:
        raise ModelError(f"instance has {P.K} arms, problem expects {problem.K}")
    matches = [k for k, h in enumerate(problem.hypotheses) if h.conforms(P.matrix, tol)]
    if not matches:
        raise ModelError("instance conforms to no hypothesis of the problem")
    if len(matches) > 1:
        shown = ", ".join(str(problem.hypotheses[k]) for k in matches[:5])
        raise ModelError(f"instance conforms to {len(matches)} hypotheses: {shown}")
    return matches[0]


def gen_matching_pairs(K: int, M: int, alphabet_size: int = 2) -> ClusteringProblem:
    """Nominal arms 0..M-1 each matched to a distinct candidate among M..K-1."""
    if M < 1 or K < 2 * M:
        raise ModelError(f"need K >= 2M >= 2, got K={K}, M={M}")
    hyps = [
        make_hypothesis([(i, j) for i, j in enumerate(perm)], K)
        for perm in itertools.permutations(range(M, K), M)
    ]
    return ClusteringProblem(K, alphabet_size, tuple(hyps), "matching-pairs")


def gen_odd_arm(K: int, alphabet_size: int = 2) -> ClusteringProblem:
    if K < 3:
        raise ModelError(f"odd-arm identification needs K >= 3, got {K}")
    hyps = [make_hypothesis([[i for i in range(K) if i != k]], K) for k in range(K)]
    return ClusteringProblem(K, alphabet_size, tuple(hyps), "odd-arm")


def set_partitions(n: int, blocks: int) -> Iterator[list[list[int]]]:
    """Partitions of range(n) into exactly ``blocks`` nonempty blocks (restricted growth strings)."""
    if blocks < 1 or blocks > n:
        return
    labels = [0] * n

    def rec(i: int, used: int) -> Iterator[list[list[int]]]:
        if n - i < blocks - used:
            return
        if i == n:
            if used == blocks:
                out: list[list[int]] = [[] for _ in range(blocks)]
                for k, lab in enumerate(labels):
                    out[lab].append(k)
                yield out
            return
        for lab in range(min(used + 1, blocks)):
            labels[i] = lab
            yield from rec(i + 1, max(used, lab + 1))

    yield from rec(0, 0)


def gen_nary_partition(K: int, N: int, alphabet_size: int = 2) -> ClusteringProblem:
    """All partitions of the K arms into exactly N groups; singleton groups are unconstrained."""
    if not 2 <= N <= K:
        raise ModelError(f"need 2 <= N <= K, got K={K}, N={N}")
    hyps = [
        make_hypothesis([b for b in part if len(b) >= 2], K)
        for part in set_partitions(K, N)
    ]
    return ClusteringProblem(K, alphabet_size, tuple(hyps), "nary")


def problem_from_spec(spec: dict, alphabet_size: int = 2) -> ClusteringProblem:
    """Build a problem from ``{"kind": ..., "K": ..., "M"|"N": ...}``."""
    try:
        kind = spec["kind"]
        K = int(spec["K"])
    except KeyError as exc:
        raise ModelError(f"problem description missing field {exc}") from None
    if kind == "matching-pairs":
        return gen_matching_pairs(K, int(spec["M"]), alphabet_size)
    if kind == "odd-arm":
        return gen_odd_arm(K, alphabet_size)
    if kind == "nary":
        return gen_nary_partition(K, int(spec["N"]), alphabet_size)
    raise ModelError(f"unknown problem kind {kind!r}")


def instance_from_json(obj: dict) -> ProblemInstance:
    try:
        arms = obj["arms"]
    except KeyError:
        raise ModelError("instance JSON lacks 'arms'") from None
    P = ProblemInstance.from_matrix(arms)
    declared = obj.get("alphabet_size")
    if declared is not None and int(declared) != P.alphabet_size:
        raise ModelError(f"alphabet_size={declared} but arms have {P.alphabet_size} symbols")
    return P


def load_instance(path: str | Path) -> ProblemInstance:
    path = Path(path)
    if not path.is_file():
        raise ModelError(f"instance file not found: {path}")
    return instance_from_json(json.loads(path.read_text()))
