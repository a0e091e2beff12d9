"""Command-line entry point: sweep, oracle, diagnostics, gen-problem."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .fw import solve_oracle
from .harness import diagnostics, export_csv, parse_config, run_sweep
from .model import ModelError, problem_from_spec

log = logging.getLogger("bandit_cluster")


def _cmd_sweep(args) -> int:
    cfg = parse_config(args.config)
    out = args.out or cfg.output
    log.info("sweep %s: %d deltas x %s x %d trials", cfg.name, len(cfg.delta_grid), cfg.algos, cfg.trials)
    res = run_sweep(cfg, threads=args.threads)
    summary, episodes = export_csv(res.rows, res.episodes, out, stem=cfg.name)
    print(f"1/T* = {res.oracle.hardness:.4f}")
    print(f"{'delta':>8} {'algo':>8} {'mean_tau':>10} {'std_tau':>9} {'err':>5} {'lower':>9}")
    for r in res.rows:
        print(f"{r.delta:8.0e} {r.algo:>8} {r.mean_tau:10.1f} {r.std_tau:9.1f} {r.error_rate:5.2f} {r.lower_bound:9.1f}")
    for algo, (slope, icpt) in res.slopes().items():
        print(f"slope[{algo}] = {slope:.3f} (intercept {icpt:.1f})")
    print(f"wrote {summary} and {episodes}")
    if res.n_capped:
        print(f"WARNING: {res.n_capped} episode(s) hit the cap", file=sys.stderr)
    elif res.error_exceeds_delta:
        print("WARNING: an empirical error rate exceeds its delta", file=sys.stderr)
    return res.exit_code()


def _cmd_oracle(args) -> int:
    cfg = parse_config(args.config)
    res = solve_oracle(cfg.instance, cfg.problem, max_iters=args.iters or cfg.oracle_iters, sigma=cfg.truth)
    print(json.dumps(res.to_json(), indent=2))
    return 0


def _cmd_diagnostics(args) -> int:
    cfg = parse_config(args.config)
    print(json.dumps(diagnostics(cfg), indent=2))
    return 0


def _cmd_gen_problem(args) -> int:
    spec = {"kind": args.kind, "K": args.K}
    if args.M is not None:
        spec["M"] = args.M
    if args.N is not None:
        spec["N"] = args.N
    problem = problem_from_spec(spec, args.alphabet)
    print(json.dumps({
        **spec,
        "n_hypotheses": len(problem),
        "hypotheses": [[list(c) for c in h.clusters] for h in problem.hypotheses],
    }))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bandit-cluster", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("sweep", help="Monte Carlo delta sweep; writes summary and per-episode CSVs")
    p.add_argument("--config", required=True)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("oracle", help="hardness T* and optimal allocation as JSON")
    p.add_argument("--config", required=True)
    p.add_argument("--iters", type=int)
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("diagnostics", help="smoothness constants, sizes and a gradient check")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_diagnostics)

    p = sub.add_parser("gen-problem", help="enumerate a hypothesis class")
    p.add_argument("--kind", required=True, choices=["matching-pairs", "odd-arm", "nary"])
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--M", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--alphabet", type=int, default=2)
    p.set_defaults(func=_cmd_gen_problem)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ModelError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
