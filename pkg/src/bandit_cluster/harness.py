"""Monte Carlo delta sweeps, slope regression, CSV export and constants diagnostics."""
from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .divergence import binary_kl
from .fw import OracleResult, lower_bound, solve_oracle
from .model import (
    ClusteringProblem,
    ModelError,
    ProblemInstance,
    instance_from_json,
    instance_hypothesis,
    load_instance,
    problem_from_spec,
)
from .scores import grad_g, lipschitz_constants, score_g
from .sim import ALGOS, DEFAULT_CAP, EpisodeResult, run_episode

SUMMARY_HEADER = ("delta", "algo", "n_trials", "mean_tau", "std_tau", "error_rate", "d_bernoulli", "lower_bound")
EPISODE_HEADER = ("seed", "delta", "algo", "tau", "recommended", "correct", "capped")
DEFAULT_DELTAS = (1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8)
SEED_ENV = "BC_SEED"


@dataclass(frozen=True)
class SweepConfig:
    problem_spec: dict
    instance: ProblemInstance
    delta_grid: tuple[float, ...] = DEFAULT_DELTAS
    trials: int = 100
    algos: tuple[str, ...] = ALGOS
    seed_base: int = 0
    cap: int = DEFAULT_CAP
    output: str = "results"
    name: str = "sweep"
    oracle_iters: int = 200_000
    problem: ClusteringProblem = field(init=False, repr=False, compare=False)
    truth: int = field(init=False, compare=False)

    def __post_init__(self) -> None:
        deltas = tuple(float(d) for d in self.delta_grid)
        if not deltas:
            raise ValueError("delta_grid is empty")
        for d in deltas:
            if not 0 < d < 0.5:
                raise ValueError(f"delta {d} outside (0, 0.5)")
        if any(a <= b for a, b in zip(deltas, deltas[1:])):
            raise ValueError("delta_grid must be strictly decreasing")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for a in self.algos:
            if a not in ALGOS:
                raise ValueError(f"unknown algorithm {a!r}")
        declared = self.problem_spec.get("alphabet_size")
        if declared is not None and int(declared) != self.instance.alphabet_size:
            raise ModelError(
                f"problem declares alphabet_size={declared}, instance has {self.instance.alphabet_size}"
            )
        problem = problem_from_spec(self.problem_spec, self.instance.alphabet_size)
        if problem.K != self.instance.K:
            raise ModelError(f"problem has K={problem.K} arms, instance has {self.instance.K}")
        if self.cap < problem.K:
            raise ValueError("cap must be at least K")
        object.__setattr__(self, "delta_grid", deltas)
        object.__setattr__(self, "algos", tuple(self.algos))
        object.__setattr__(self, "problem", problem)
        object.__setattr__(self, "truth", instance_hypothesis(self.instance, problem))


def parse_config(source: str | Path | dict, seed_override: int | None = None) -> SweepConfig:
    """Load and validate a sweep config.

    ``source`` is a JSON path or an already-decoded dict. A string
    ``instance`` is read as a path relative to the config file.
    ``$BC_SEED`` replaces ``seed_base`` unless ``seed_override`` is given.
    """
    base = Path(".")
    if isinstance(source, dict):
        raw = dict(source)
    else:
        path = Path(source)
        if not path.is_file():
            raise ModelError(f"config file not found: {path}")
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ModelError(f"malformed JSON in {path}: {exc}") from None
        base = path.parent
    try:
        spec = raw["problem"]
        inst = raw["instance"]
    except KeyError as exc:
        raise ModelError(f"config missing field {exc}") from None
    if isinstance(inst, str):
        inst_path = Path(inst)
        instance = load_instance(inst_path if inst_path.is_absolute() else base / inst_path)
    else:
        instance = instance_from_json(inst)
    seed = raw.get("seed_base", 0)
    if seed_override is None and os.environ.get(SEED_ENV):
        seed_override = int(os.environ[SEED_ENV])
    if seed_override is not None:
        seed = seed_override
    return SweepConfig(
        problem_spec=dict(spec),
        instance=instance,
        delta_grid=tuple(raw.get("delta_grid", DEFAULT_DELTAS)),
        trials=int(raw.get("trials", 100)),
        algos=tuple(raw.get("algos", ALGOS)),
        seed_base=int(seed),
        cap=int(raw.get("cap", DEFAULT_CAP)),
        output=str(raw.get("output", "results")),
        name=str(raw.get("name", "sweep")),
        oracle_iters=int(raw.get("oracle_iters", 200_000)),
    )


@dataclass(frozen=True)
class SweepRow:
    delta: float
    algo: str
    n_trials: int
    mean_tau: float
    std_tau: float
    error_rate: float
    d_bernoulli: float
    lower_bound: float


@dataclass
class SweepOutcome:
    config: SweepConfig
    oracle: OracleResult
    rows: list[SweepRow]
    episodes: list[EpisodeResult]

    @property
    def n_capped(self) -> int:
        return sum(e.capped for e in self.episodes)

    @property
    def error_exceeds_delta(self) -> bool:
        return any(r.error_rate > r.delta for r in self.rows)

    def exit_code(self) -> int:
        if self.n_capped:
            return 2
        if self.error_exceeds_delta:
            return 3
        return 0

    def slopes(self) -> dict[str, tuple[float, float]]:
        out = {}
        for algo in self.config.algos:
            rows = [r for r in self.rows if r.algo == algo]
            if len(rows) >= 2:
                out[algo] = regress_slope(rows)
        return out


def summarize(episodes: list[EpisodeResult], t_star: float) -> SweepRow:
    """Aggregate episodes sharing one (delta, algo) pair."""
    if not episodes:
        raise ValueError("no episodes to summarize")
    delta, algo = episodes[0].delta, episodes[0].algo
    taus = np.array([e.tau for e in episodes], dtype=float)
    std = float(taus.std(ddof=1)) if taus.size > 1 else 0.0
    errors = sum(not e.correct for e in episodes)
    return SweepRow(
        delta=delta,
        algo=algo,
        n_trials=len(episodes),
        mean_tau=float(taus.mean()),
        std_tau=std,
        error_rate=errors / len(episodes),
        d_bernoulli=binary_kl(delta, 1.0 - delta),
        lower_bound=lower_bound(delta, t_star),
    )


_WORKER_CFG: SweepConfig | None = None


def _init_worker(cfg: SweepConfig) -> None:
    global _WORKER_CFG
    _WORKER_CFG = cfg


def _run_block(job: tuple[float, str, int, int]) -> list[EpisodeResult]:
    delta, algo, lo, hi = job
    cfg = _WORKER_CFG
    return [
        run_episode(cfg.problem, cfg.instance, algo, delta, cfg.seed_base + i, cfg.cap, truth=cfg.truth)
        for i in range(lo, hi)
    ]


def _jobs(cfg: SweepConfig, block: int) -> list[tuple[float, str, int, int]]:
    return [
        (d, a, lo, min(lo + block, cfg.trials))
        for d in cfg.delta_grid
        for a in cfg.algos
        for lo in range(0, cfg.trials, block)
    ]


def run_sweep(
    cfg: SweepConfig,
    threads: int = 1,
    oracle: OracleResult | None = None,
    progress=None,
) -> SweepOutcome:
    """Run ``trials`` episodes (seeds ``seed_base + i``) for every (delta, algo) pair.

    Output order is (delta as listed, algo as listed, seed) whatever ``threads`` is.
    """
    if threads < 1:
        raise ValueError("threads must be >= 1")
    if oracle is None:
        oracle = solve_oracle(cfg.instance, cfg.problem, max_iters=cfg.oracle_iters, sigma=cfg.truth)
    block = max(1, min(cfg.trials, 10))
    jobs = _jobs(cfg, block)
    if threads == 1:
        _init_worker(cfg)
        results = []
        for job in jobs:
            results.append(_run_block(job))
            if progress:
                progress(job)
    else:
        with ProcessPoolExecutor(threads, initializer=_init_worker, initargs=(cfg,)) as pool:
            results = list(pool.map(_run_block, jobs))
    episodes = [e for part in results for e in part]
    rows = []
    for d in cfg.delta_grid:
        for a in cfg.algos:
            group = [e for e in episodes if e.delta == d and e.algo == a]
            rows.append(summarize(group, oracle.t_star))
    return SweepOutcome(cfg, oracle, rows, episodes)


def regress_slope(rows: list[SweepRow]) -> tuple[float, float]:
    """OLS fit ``mean_tau = slope * d(delta || 1 - delta) + intercept``."""
    x = np.array([r.d_bernoulli for r in rows], dtype=float)
    y = np.array([r.mean_tau for r in rows], dtype=float)
    if len(set(r.delta for r in rows)) < 2:
        raise ValueError("regression needs at least two distinct delta values")
    xc = x - x.mean()
    slope = float(xc @ (y - y.mean()) / (xc @ xc))
    return slope, float(y.mean() - slope * x.mean())


def _fmt(v) -> str:
    if isinstance(v, bool) or isinstance(v, (np.bool_,)):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def _write(path: Path, header, records) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for rec in records:
            w.writerow([_fmt(v) for v in rec])


def export_csv(rows: list[SweepRow], episodes: list[EpisodeResult], path: str | Path, stem: str = "sweep") -> tuple[Path, Path]:
    """Write ``<stem>_summary.csv`` and ``<stem>_episodes.csv`` under directory ``path``."""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    summary, per_ep = out / f"{stem}_summary.csv", out / f"{stem}_episodes.csv"
    _write(summary, SUMMARY_HEADER, ([getattr(r, k) for k in SUMMARY_HEADER] for r in rows))
    _write(per_ep, EPISODE_HEADER, ([getattr(e, k) for k in EPISODE_HEADER] for e in episodes))
    return summary, per_ep


def read_summary_csv(path: str | Path) -> list[SweepRow]:
    with open(path, newline="") as fh:
        return [
            SweepRow(
                delta=float(r["delta"]),
                algo=r["algo"],
                n_trials=int(r["n_trials"]),
                mean_tau=float(r["mean_tau"]),
                std_tau=float(r["std_tau"]),
                error_rate=float(r["error_rate"]),
                d_bernoulli=float(r["d_bernoulli"]),
                lower_bound=float(r["lower_bound"]),
            )
            for r in csv.DictReader(fh)
        ]


def read_episodes_csv(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        return [
            {
                "seed": int(r["seed"]),
                "delta": float(r["delta"]),
                "algo": r["algo"],
                "tau": int(r["tau"]),
                "recommended": int(r["recommended"]),
                "correct": r["correct"] == "true",
                "capped": r["capped"] == "true",
            }
            for r in csv.DictReader(fh)
        ]


def gradient_fd_check(P, problem: ClusteringProblem, n_points: int = 20, step: float = 1e-6, seed: int = 0) -> float:
    """Largest relative error between analytic and central-difference gradients.

    Error at a point is ``max|fd - grad| / max(max|grad|, 1e-3)`` over arms,
    taken over every hypothesis. Points are half uniform, half Dirichlet(1),
    so every weight is at least ``1/(2K)``.
    """
    M = np.asarray(P.matrix if isinstance(P, ProblemInstance) else P, dtype=float)
    rng = np.random.default_rng(seed)
    K = M.shape[0]
    worst = 0.0
    for _ in range(n_points):
        w = 0.5 * rng.dirichlet(np.ones(K)) + 0.5 / K
        for h in problem.hypotheses:
            g = grad_g(M, w, h)
            fd = np.empty(K)
            for i in range(K):
                e = np.zeros(K)
                e[i] = step
                fd[i] = (score_g(M, w + e, h) - score_g(M, w - e, h)) / (2 * step)
            scale = max(float(np.abs(g).max()), 1e-3)
            worst = max(worst, float(np.abs(fd - g).max() / scale))
    return worst


def diagnostics(cfg: SweepConfig, oracle: OracleResult | None = None, fd_points: int = 5) -> dict:
    """Smoothness constants, problem sizes, hardness and a gradient spot check."""
    P, problem = cfg.instance, cfg.problem
    if P.p_min <= 0:
        raise ModelError("diagnostics need p_min > 0")
    if oracle is None:
        oracle = solve_oracle(P, problem, max_iters=cfg.oracle_iters, sigma=cfg.truth)
    consts = lipschitz_constants(P, problem, cfg.truth)
    return {
        "L": consts.L,
        "D": consts.D,
        "E": consts.E,
        "p_min": P.p_min,
        "k_tilde": problem.k_tilde,
        "n_hypotheses": len(problem),
        "truth": cfg.truth,
        "t_star": oracle.t_star,
        "inv_t_star": oracle.hardness,
        "w_star": oracle.w_star.tolist(),
        "oracle_iterations": oracle.iterations,
        "gradient_fd_max_rel_err": gradient_fd_check(P, problem, n_points=fd_points),
    }


def with_seed(cfg: SweepConfig, seed_base: int) -> SweepConfig:
    return replace(cfg, seed_base=seed_base)
