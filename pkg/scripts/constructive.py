"""Gaps of MCE IRL and robust MCE IRL on the three-state example, next to the
closed forms."""

import argparse

from robust_irl.bounds import constructive_gaps
from robust_irl.envs import make_constructive
from robust_irl.experiment import default_irl_config
from robust_irl.irl import mce_irl, robust_mce_irl
from robust_irl.mdp import expected_return, state_occupancy
from robust_irl.solvers import value_iteration


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, nargs="+", default=[0.05, 0.1, 0.2])
    args = ap.parse_args()
    cfg = default_irl_config("constructive")
    learner = make_constructive(0.0)
    phi = learner.reward.features
    v1 = expected_return(learner, mce_irl(learner, state_occupancy(learner, value_iteration(learner).policy), phi, cfg).policy)
    print("eps_e,alpha,mce_gap,mce_gap_closed_form,robust_gap,robust_gap_closed_form")
    for eps in args.eps:
        expert = make_constructive(eps)
        rho = state_occupancy(expert, value_iteration(expert).policy)
        alpha = 1 - eps
        mce = expected_return(learner, mce_irl(learner, rho, phi, cfg).policy)
        rob = expected_return(learner, robust_mce_irl(learner, rho, alpha, phi, cfg).policy)
        cf = constructive_gaps(eps, learner.gamma, alpha)
        print(f"{eps},{alpha:.4g},{abs(v1 - mce):.6g},{cf['mce_gap']:.6g},{abs(v1 - rob):.6g},{cf['robust_gap']:.6g}")


if __name__ == "__main__":
    main()
