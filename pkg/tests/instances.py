"""The four shipped benchmark instances, built in code so tests do not depend on configs/."""
from dataclasses import dataclass

from bandit_cluster.model import (
    ClusteringProblem,
    ProblemInstance,
    gen_matching_pairs,
    gen_nary_partition,
    gen_odd_arm,
)


@dataclass(frozen=True)
class Case:
    name: str
    P: ProblemInstance
    problem: ClusteringProblem
    truth: tuple  # clusters of the true hypothesis, 0-indexed
    reference_hardness: float  # target 1/T* used by the acceptance gate
    hardness: float  # 1/T* from an independent SLSQP solve


def _case(name, arms, problem, truth, reference, hardness):
    return Case(name, ProblemInstance.from_matrix(arms), problem, truth, reference, hardness)


CASES = {
    c.name: c
    for c in [
        _case(
            "matching_pairs_x3",
            [[.1, .1, .8], [.4, .4, .2], [.1, .1, .8], [.4, .4, .2], [.5, .05, .45], [.1, .8, .1]],
            gen_matching_pairs(6, 2, 3),
            ((0, 2), (1, 3)),
            22.61,
            22.187,
        ),
        _case(
            "matching_pairs_x5",
            [[.1, .1, .6, .1, .1], [.2] * 5, [.1, .1, .6, .1, .1], [.2] * 5,
             [.4, .05, .1, .05, .4], [.1, .6, .1, .1, .1]],
            gen_matching_pairs(6, 2, 5),
            ((0, 2), (1, 3)),
            22.74,
            22.373,
        ),
        _case(
            "odd_arm",
            [[.1, .1, .8]] * 6 + [[.6, .2, .2]],
            gen_odd_arm(7, 3),
            ((0, 1, 2, 3, 4, 5),),
            5.37,
            5.38872,
        ),
        _case(
            "nary_partition",
            [[.6, .2, .2]] * 2 + [[.25, .7, .05]] * 2 + [[.05, .05, .9]] * 2,
            gen_nary_partition(6, 3, 3),
            ((0, 1), (2, 3), (4, 5)),
            13.42,
            13.183,
        ),
    ]
}
