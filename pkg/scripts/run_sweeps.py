#!/usr/bin/env python3
"""Run the delta sweeps for every shipped instance config and print slopes next to 1/T*.

    python3 scripts/run_sweeps.py                     # all four configs, 100 trials
    python3 scripts/run_sweeps.py --trials 20 odd_arm # quicker, one config
"""
from __future__ import annotations

import argparse
import json
import time
from dataclasses import replace
from pathlib import Path

from bandit_cluster.harness import export_csv, parse_config, run_sweep

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ("matching_pairs_x3", "matching_pairs_x5", "odd_arm", "nary_partition")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("names", nargs="*", default=CONFIGS)
    ap.add_argument("--trials", type=int)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default=str(ROOT / "results"))
    args = ap.parse_args()

    report = {}
    for name in args.names:
        cfg = parse_config(ROOT / "configs" / f"{name}.json")
        if args.trials:
            cfg = replace(cfg, trials=args.trials)
        start = time.perf_counter()
        res = run_sweep(cfg, threads=args.threads)
        export_csv(res.rows, res.episodes, args.out, stem=name)
        slopes = {a: s for a, (s, _) in res.slopes().items()}
        report[name] = {
            "inv_t_star": res.oracle.hardness,
            "slopes": slopes,
            "ratio_tasfw": slopes.get("tasfw", float("nan")) / res.oracle.hardness,
            "max_error_rate": max(r.error_rate for r in res.rows),
            "capped": res.n_capped,
            "seconds": round(time.perf_counter() - start, 1),
        }
        for r in res.rows:
            print(f"{name:18} {r.delta:8.0e} {r.algo:8} mean={r.mean_tau:9.1f} sd={r.std_tau:8.1f} err={r.error_rate}")
        print(json.dumps({name: report[name]}, indent=1), flush=True)
    (Path(args.out) / "slopes.json").write_text(json.dumps(report, indent=2) + "\n")


if __name__ == "__main__":
    main()
