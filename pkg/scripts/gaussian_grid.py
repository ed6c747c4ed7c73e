"""Relative-entropy IRL vs its robust variant on the continuous navigation task."""

import argparse
import csv
import sys

from robust_irl.continuous import ContinuousExperiment, run_continuous


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps-e", type=float, default=0.2)
    ap.add_argument("--eps-l", type=float, default=0.0)
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.85, 1.0])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    args = ap.parse_args()
    cfg = ContinuousExperiment(eps_e=args.eps_e, eps_l=args.eps_l, alphas=tuple(args.alphas), seeds=tuple(args.seeds))
    rows = run_continuous(cfg)
    w = csv.DictWriter(sys.stdout, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)


if __name__ == "__main__":
    main()
