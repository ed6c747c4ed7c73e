"""Command-line entry point.

Exit codes: 0 success, 1 a sweep cell failed, 2 bad configuration or input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import bounds as B
from .continuous import ContinuousExperiment, PgConfig, ReIrlConfig, run_continuous
from .envs import PRESETS, make_preset
from .experiment import ExperimentConfig, rows_to_csv, rows_to_json, run_experiment
from .feasibility import InfeasibilityReport, check_feasibility, least_squares_witness, solve_matching_policy
from .io import load_mdp, load_vector, mdp_to_dict, to_jsonable
from .irl import IrlConfig, mce_irl, robust_mce_irl
from .mdp import ConfigurationError, ConvergenceError, DomainError, ShapeError, state_occupancy
from .solvers import soft_value_iteration, two_player_soft_vi, value_iteration

EXIT_OK, EXIT_CELL, EXIT_CONFIG = 0, 1, 2


def _common(p):
    p.add_argument("--config", default=argparse.SUPPRESS, help="JSON config file")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--out", default=argparse.SUPPRESS, help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=argparse.SUPPRESS)
    p.add_argument("--threads", type=int, default=argparse.SUPPRESS)


def _opt(args, name, default=None):
    return getattr(args, name, default)


def _load_config(args):
    path = _opt(args, "config")
    if not path:
        return {}
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ConfigurationError("config must be a JSON object")
    return cfg


def _write(args, text):
    out = _opt(args, "out")
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(args, obj):
    _write(args, json.dumps(to_jsonable(obj), indent=1) + "\n")


def _target(args, learner):
    if args.rho:
        return load_vector(args.rho, "rho")
    if args.expert:
        expert = load_mdp(args.expert)
        return state_occupancy(expert, value_iteration(expert).policy)
    raise ConfigurationError("give --rho or --expert")


def _features(args, learner):
    if args.features == "one-hot":
        return np.eye(learner.n_states)
    if learner.reward is None:
        raise ConfigurationError("--features reward needs an MDP with a reward")
    return learner.reward.features


# ---------------------------------------------------------------------------


def cmd_env_make(args):
    cfg = _load_config(args)
    name = args.preset or cfg.get("preset")
    if name not in PRESETS:
        raise ConfigurationError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    m = make_preset(name, n=args.n or cfg.get("n"), eps=args.eps, seed=_opt(args, "seed", 0))
    _dump(args, mdp_to_dict(m))
    return EXIT_OK


def cmd_solve(args):
    m = load_mdp(args.mdp)
    if args.method == "hard":
        s = value_iteration(m, args.tol)
        out = {"v": s.v_star, "q": s.q_star, "policy": s.policy, "iterations": s.iterations}
    elif args.method == "soft":
        s = soft_value_iteration(m, args.tol)
        out = {"v": s.v_soft, "q": s.q_soft, "policy": s.policy, "iterations": s.iterations}
    else:
        s = two_player_soft_vi(m, args.alpha, args.tol)
        out = {"v": s.v, "joint_q": s.joint_q, "player": s.player, "opponent": s.opponent,
               "iterations": s.iterations}
    _dump(args, out)
    return EXIT_OK


def _irl_common(args, robust):
    learner = load_mdp(args.learner)
    rho = _target(args, learner)
    cfg = IrlConfig(**_load_config(args).get("irl", {}))
    log = open(args.diagnostics, "w") if args.diagnostics else sys.stderr

    def cb(step, g, l1):
        log.write(json.dumps({"step": step, "grad_norm": g, "l1_mismatch": l1}) + "\n")

    try:
        phi = _features(args, learner)
        if robust:
            res = robust_mce_irl(learner, rho, args.alpha, phi, cfg, cb)
        else:
            res = mce_irl(learner, rho, phi, cfg, cb)
    finally:
        if log is not sys.stderr:
            log.close()
    out = {"theta": res.theta, "policy": res.policy, "final_l1_mismatch": res.final_l1_mismatch}
    if robust:
        out.update(opponent=res.opponent, player_l1_mismatch=res.player_l1_mismatch)
    _dump(args, out)
    return EXIT_OK


def cmd_irl(args):
    return _irl_common(args, False)


def cmd_robust_irl(args):
    return _irl_common(args, True)


def cmd_feasibility(args):
    learner = load_mdp(args.learner)
    rho = _target(args, learner)
    fs = check_feasibility(learner, rho, args.rel_tol)
    _, residual = least_squares_witness(fs)
    wit = solve_matching_policy(fs)
    out = {
        "rank_t": fs.rank_t,
        "rank_augmented": fs.rank_augmented,
        "feasible": fs.feasible,
        "full_rank": fs.full_rank,
        "witness_residual": residual,
        "witness_nonnegative": not isinstance(wit, InfeasibilityReport) or wit.most_negative >= -1e-9,
    }
    _dump(args, out)
    return EXIT_OK


_EXTRA = {
    "reward-transfer": ("d_train_learner", "kappa_train", "d_pol_term"),
    "infeasible": ("d_expert_tstar", "d_pol_expert_player"),
    "corollary-alpha": ("d_dyn_tstar_expert",),
}


def cmd_bounds(args):
    raw = args.inputs
    data = json.loads(open(raw[1:]).read() if raw.startswith("@") else raw)
    if not isinstance(data, dict):
        raise ConfigurationError("bound inputs must be a JSON object")
    extra = {k: data.pop(k) for k in _EXTRA.get(args.formula, ()) if k in data}
    try:
        inp = B.BoundInputs(**data)
    except TypeError as e:
        raise ConfigurationError(str(e)) from e
    if args.formula == "corollary-alpha":
        value, terms = B.corollary_alpha_choice(inp.d_dyn, extra.get("d_dyn_tstar_expert", 0.0)), {}
    elif args.formula == "reward-transfer":
        terms = B.reward_transfer_terms(inp, **extra)
        value = sum(terms.values())
    elif args.formula == "infeasible":
        terms = B.infeasible_gap_terms(inp, **extra)
        value = sum(terms.values())
    else:
        value, terms = B.FORMULAS[args.formula](inp), {}
    _dump(args, {"formula": args.formula, "value": value, "terms": terms})
    return EXIT_OK


def cmd_experiment(args):
    d = _load_config(args)
    if args.paper_scale:
        d.setdefault("grid_size", 10)
        d.setdefault("eval_mode", "monte_carlo")
    if args.soft_expert:
        d["soft_expert"] = True
    if _opt(args, "seed") is not None:
        d["seeds"] = [args.seed]
    if _opt(args, "threads") is not None:
        d["threads"] = args.threads
    if _opt(args, "out"):
        d["output_path"] = None  # written below in the requested format
    cfg = ExperimentConfig.from_dict(d)
    rows = run_experiment(cfg)
    fmt = _opt(args, "format") or "csv"
    _write(args, rows_to_csv(rows) if fmt == "csv" else rows_to_json(rows))
    return EXIT_CELL if any(r.error for r in rows) else EXIT_OK


def cmd_reirl(args):
    d = _load_config(args)
    known = {"eps_E", "eps_L", "alpha", "seeds", "N_theta", "N_pi", "n_traj", "horizon", "lr",
             "n_iters", "dataset_size", "n_demos", "n_eval"}
    unknown = set(d) - known
    if unknown:
        raise ConfigurationError(f"unknown reirl keys {sorted(unknown)}")
    alphas = d.get("alpha", [0.85, 1.0])
    alphas = tuple(alphas) if isinstance(alphas, list) else (alphas,)
    seeds = (args.seed,) if _opt(args, "seed") is not None else tuple(d.get("seeds", (0, 1, 2, 3, 4)))
    pg = PgConfig(n_outer=d.get("N_pi", 50), n_traj=d.get("n_traj", 20), lr=d.get("lr", 0.01))
    irl = ReIrlConfig(n_iters=d.get("n_iters", 10), n_theta=d.get("N_theta", 20),
                      dataset_size=d.get("dataset_size", 100), pg=pg)
    cfg = ContinuousExperiment(eps_e=d.get("eps_E", 0.2), eps_l=d.get("eps_L", 0.0), alphas=alphas,
                               seeds=seeds, horizon=d.get("horizon", 200), irl=irl,
                               n_demos=d.get("n_demos", 50), n_eval=d.get("n_eval", 200))
    rows = run_continuous(cfg)
    fields = ("seed", "method", "eps_E", "eps_L", "alpha", "mean_return", "sd_return")
    if (_opt(args, "format") or "csv") == "json":
        _dump(args, rows)
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(fields)
        for r in rows:
            w.writerow([r["seed"], r["method"], r["eps_e"], r["eps_l"], r["alpha"],
                        f"{r['mean_return']:.12g}", f"{r['sd_return']:.12g}"])
        _write(args, buf.getvalue())
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="robust-irl", description=__doc__)
    _common(p)
    sub = p.add_subparsers(dest="command", required=True)

    env = sub.add_parser("env", help="environment utilities")
    env_sub = env.add_subparsers(dest="env_command", required=True)
    mk = env_sub.add_parser("make", help="emit a preset MDP as JSON")
    _common(mk)
    mk.add_argument("preset", nargs="?", help=", ".join(PRESETS))
    mk.add_argument("--eps", type=float, default=0.0, help="uniform transition noise")
    mk.add_argument("--n", type=int, default=None, help="grid side length")
    mk.set_defaults(func=cmd_env_make)

    s = sub.add_parser("solve", help="hard, soft or two-player value iteration")
    _common(s)
    s.add_argument("--mdp", required=True)
    s.add_argument("--method", choices=("hard", "soft", "two-player"), default="soft")
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--tol", type=float, default=1e-10)
    s.set_defaults(func=cmd_solve)

    for name, func, robust in (("irl", cmd_irl, False), ("robust-irl", cmd_robust_irl, True)):
        q = sub.add_parser(name, help=f"{'robust ' if robust else ''}MCE IRL on a learner MDP")
        _common(q)
        q.add_argument("--learner", required=True, help="learner MDP JSON")
        q.add_argument("--rho", help="target occupancy JSON (list or {'rho': [...]})")
        q.add_argument("--expert", help="expert MDP JSON; its optimal policy gives the target")
        q.add_argument("--features", choices=("one-hot", "reward"), default="one-hot")
        q.add_argument("--diagnostics", help="JSON-lines log path (default stderr)")
        if robust:
            q.add_argument("--alpha", type=float, required=True)
        q.set_defaults(func=func)

    f = sub.add_parser("feasibility", help="rank test for occupancy matching")
    _common(f)
    f.add_argument("--learner", required=True)
    f.add_argument("--rho")
    f.add_argument("--expert")
    f.add_argument("--rel-tol", type=float, default=1e-9)
    f.set_defaults(func=cmd_feasibility)

    b = sub.add_parser("bounds", help="evaluate a performance bound")
    _common(b)
    b.add_argument("formula", choices=sorted(B.FORMULAS) + ["corollary-alpha"])
    b.add_argument("--inputs", required=True, help="JSON object or @file")
    b.set_defaults(func=cmd_bounds)

    e = sub.add_parser("experiment", help="noise sweep over methods")
    _common(e)
    e.add_argument("--paper-scale", action="store_true", help="10x10 grids, Monte Carlo evaluation")
    e.add_argument("--soft-expert", action="store_true", help="soft-optimal expert demonstrations")
    e.set_defaults(func=cmd_experiment)

    r = sub.add_parser("reirl", help="continuous relative-entropy IRL runs")
    _common(r)
    r.set_defaults(func=cmd_reirl)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    try:
        return args.func(args)
    except (ConfigurationError, DomainError, ShapeError, OSError, json.JSONDecodeError,
            KeyError, TypeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CELL


if __name__ == "__main__":
    sys.exit(main())
