"""Noise sweep on a tabular preset: mce, robust (every alpha) and the ideal
learner-optimal policy. Writes CSV or JSON rows."""

import argparse

from robust_irl.experiment import ExperimentConfig, emit_results, rows_to_csv, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--env", default="grid-1")
    ap.add_argument("--grid-size", type=int, default=None)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.8, 0.85, 0.9, 0.95, 1.0])
    ap.add_argument("--eval", choices=("exact", "monte_carlo"), default="monte_carlo")
    ap.add_argument("--n-per-state", type=int, default=200)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default=None, help="path ending in .csv or .json (default stdout)")
    args = ap.parse_args()
    cfg = ExperimentConfig(env_preset=args.env, grid_size=args.grid_size, seeds=args.seeds,
                           alpha_grid=args.alphas, eval_mode=args.eval, n_per_state=args.n_per_state,
                           threads=args.threads, record_timing=False)
    rows = run_experiment(cfg)
    if args.out:
        emit_results(rows, args.out, "json" if args.out.endswith(".json") else "csv")
    else:
        print(rows_to_csv(rows), end="")


if __name__ == "__main__":
    main()
