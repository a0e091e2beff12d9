"""Fixed-confidence clustering of categorical arms with bandit feedback (TaS-FW)."""
from .divergence import binary_kl, entropy, g_fn, kl, mixture
from .fw import OracleResult, fws_step, lower_bound, solve_game, solve_oracle
from .harness import SweepConfig, SweepRow, diagnostics, export_csv, parse_config, regress_slope, run_sweep
from .model import (
    ClusteringProblem,
    Hypothesis,
    ModelError,
    ProblemInstance,
    gen_matching_pairs,
    gen_nary_partition,
    gen_odd_arm,
    instance_hypothesis,
    make_hypothesis,
    validate_assumption1,
)
from .scores import best_estimate, grad_g, lipschitz_constants, score_board, score_g, score_G, z_statistic
from .sim import EpisodeResult, pull, run_episode
from .stopping import ThresholdParams, threshold

__all__ = [
    "ClusteringProblem", "EpisodeResult", "Hypothesis", "ModelError", "OracleResult", "ProblemInstance",
    "SweepConfig", "SweepRow", "ThresholdParams", "best_estimate", "binary_kl", "diagnostics", "entropy",
    "export_csv", "fws_step", "g_fn", "gen_matching_pairs", "gen_nary_partition", "gen_odd_arm", "grad_g",
    "instance_hypothesis", "kl", "lipschitz_constants", "lower_bound", "make_hypothesis", "mixture",
    "parse_config", "pull", "regress_slope", "run_episode", "run_sweep", "score_G", "score_board", "score_g",
    "solve_game", "solve_oracle", "threshold", "validate_assumption1", "z_statistic",
]
