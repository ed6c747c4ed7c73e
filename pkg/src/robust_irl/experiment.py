"""Sweep harness over expert/learner noise levels and opponent strengths."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bounds import BoundInputs, robust_gap_bound, thm1_gap_bound
from .envs import make_preset
from .irl import IrlConfig, mce_irl, robust_mce_irl
from .mdp import ConfigurationError, dyn_distance, expected_return, state_occupancy
from .solvers import soft_value_iteration, value_iteration

METHODS = ("mce", "robust", "ideal")


@dataclass
class ExperimentConfig:
    env_preset: str = "grid-1"
    eps_e_grid: list = field(default_factory=lambda: [0.0, 0.05, 0.1, 0.15, 0.2])
    eps_l_grid: list = field(default_factory=lambda: [0.0, 0.05, 0.1])
    alpha_grid: list = field(default_factory=lambda: [0.8, 0.85, 0.9, 0.95])
    methods: list = field(default_factory=lambda: list(METHODS))
    seeds: list = field(default_factory=lambda: [0])
    eval_mode: str = "exact"  # or "monte_carlo"
    n_per_state: int = 1000
    horizon: int = 1000
    irl: Optional[IrlConfig] = None
    output_path: Optional[str] = None
    grid_size: Optional[int] = None
    soft_expert: bool = False
    record_timing: bool = True
    threads: int = 1
    env_seed: int = 0

    def __post_init__(self):
        for name in ("eps_e_grid", "eps_l_grid", "seeds", "methods"):
            if not getattr(self, name):
                raise ConfigurationError(f"{name} must be non-empty")
        if "robust" in self.methods and not self.alpha_grid:
            raise ConfigurationError("alpha_grid must be non-empty for the robust method")
        bad = set(self.methods) - set(METHODS)
        if bad:
            raise ConfigurationError(f"unknown methods {sorted(bad)}")
        if self.eval_mode not in ("exact", "monte_carlo"):
            raise ConfigurationError(f"unknown eval_mode {self.eval_mode!r}")
        if self.n_per_state < 1 or self.horizon < 1 or self.threads < 1:
            raise ConfigurationError("evaluation sizes and threads must be positive")
        if self.irl is None:
            self.irl = default_irl_config(self.env_preset)
        elif isinstance(self.irl, dict):
            # partial overrides on top of the preset default
            self.irl = dataclasses.replace(default_irl_config(self.env_preset), **self.irl)

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigurationError(f"unknown config keys {sorted(unknown)}")
        return cls(**d)


def default_irl_config(preset):
    if preset.startswith("objectworld"):
        return IrlConfig.objectworld()
    if preset == "constructive":
        # values scale as 1/(1 - gamma) here, so the grid step size overshoots
        return IrlConfig(learning_rate=0.05)
    return IrlConfig()


ROW_FIELDS = (
    "env",
    "eps_e",
    "eps_l",
    "alpha",
    "method",
    "seed",
    "return_mean",
    "return_sd",
    "d_dyn",
    "thm1_bound",
    "l1_mismatch",
    "wall_ms",
    "best_alpha",
    "exact_return",
    "gap_bound",
    "error",
)
_STR_FIELDS = {"env", "method", "error"}
_INT_FIELDS = {"seed"}


def _r12(x):
    if x is None:
        return None
    x = float(x)
    return x if not math.isfinite(x) else float(f"{x:.12g}")


@dataclass
class ResultRow:
    env: str
    eps_e: float
    eps_l: float
    alpha: Optional[float]
    method: str
    seed: int
    return_mean: Optional[float]
    return_sd: Optional[float]
    d_dyn: float
    thm1_bound: float
    l1_mismatch: Optional[float]
    wall_ms: float
    best_alpha: Optional[float] = None
    exact_return: Optional[float] = None
    gap_bound: Optional[float] = None
    error: Optional[str] = None

    def __post_init__(self):
        for f in ROW_FIELDS:
            if f not in _STR_FIELDS and f not in _INT_FIELDS:
                setattr(self, f, _r12(getattr(self, f)))
        if self.return_sd is not None and self.return_sd < 0:
            raise ValueError("return_sd must be nonnegative")

    def sort_key(self):
        a = -1.0 if self.alpha is None else self.alpha
        return (self.env, self.eps_e, self.eps_l, self.method, a, self.seed)


def evaluate_policy(mdp, policy, mode="exact", n_per_state=1000, horizon=1000, rng=None):
    """Return (mean, sd) of the discounted return under the MDP's reward."""
    if mode == "exact":
        return expected_return(mdp, policy), 0.0
    if mode != "monte_carlo":
        raise ConfigurationError(f"unknown evaluation mode {mode!r}")
    rng = np.random.default_rng(rng)
    r = mdp.reward_vector()
    n = n_per_state * mdp.n_states
    s_count, a_count = mdp.n_states, mdp.n_actions
    pol_cdf = np.cumsum(policy, axis=1)
    pol_cdf[:, -1] = 1.0
    t_cdf = np.cumsum(mdp.transitions.reshape(s_count * a_count, s_count), axis=1)
    t_cdf[:, -1] = 1.0
    p0_cdf = np.cumsum(mdp.p0)
    p0_cdf[-1] = 1.0
    states = np.searchsorted(p0_cdf, rng.random(n), side="right")
    returns = np.zeros(n)
    disc = 1.0
    for _ in range(horizon):
        returns += disc * r[states]
        disc *= mdp.gamma
        u = rng.random(n)
        actions = (u[:, None] >= pol_cdf[states]).sum(axis=1)
        u = rng.random(n)
        states = (u[:, None] >= t_cdf[states * a_count + actions]).sum(axis=1)
    return float(returns.mean()), float(returns.std(ddof=1)) if n > 1 else 0.0


def _expert_policy(expert, soft):
    return soft_value_iteration(expert).policy if soft else value_iteration(expert).policy


def _run_cell(cfg: ExperimentConfig, eps_e, eps_l, cache=None):
    cache = {} if cache is None else cache
    n = cfg.grid_size
    env = cfg.env_preset
    learner = make_preset(env, n=n, eps=eps_l, seed=cfg.env_seed)
    expert = make_preset(env, n=n, eps=eps_e, seed=cfg.env_seed)
    d = dyn_distance(learner.transitions, expert.transitions)
    reward = learner.reward
    binp = BoundInputs.from_reward(learner.gamma, reward.values, learner.n_actions, d_dyn=min(d, 2.0))
    thm1 = thm1_gap_bound(binp)
    rho = state_occupancy(expert, _expert_policy(expert, cfg.soft_expert))

    jobs = []
    for m in cfg.methods:
        if m == "robust":
            jobs.extend(("robust", float(a)) for a in cfg.alpha_grid)
        else:
            jobs.append((m, None))

    rows = []
    for method, alpha in jobs:
        # robust at alpha = 1 runs the same iterates as mce, so they share a fit
        fit = ("mce", None) if method == "robust" and alpha == 1.0 else (method, alpha)
        key = (env, n, cfg.env_seed, eps_e, eps_l, *fit, cfg.soft_expert, repr(cfg.irl))
        t0 = time.perf_counter()
        try:
            if key in cache:
                policy, l1 = cache[key]
            else:
                if fit[0] == "mce":
                    res = mce_irl(learner, rho, reward.features, cfg.irl)
                    policy, l1 = res.policy, res.final_l1_mismatch
                elif fit[0] == "robust":
                    res = robust_mce_irl(learner, rho, alpha, reward.features, cfg.irl)
                    policy, l1 = res.policy, res.final_l1_mismatch
                else:
                    policy, l1 = value_iteration(learner).policy, None
                cache[key] = (policy, l1)
            exact = expected_return(learner, policy)
            err = None
        except Exception as e:  # a failing cell must not abort the sweep
            policy, l1, exact, err = None, None, None, f"{type(e).__name__}: {e}"
        fit_ms = (time.perf_counter() - t0) * 1000
        if method == "mce":
            gb = thm1
        elif method == "robust":
            gb = robust_gap_bound(binp.with_(alpha=alpha))
        else:
            gb = None
        for seed in cfg.seeds:
            t1 = time.perf_counter()
            mean = sd = None
            if err is None:
                if cfg.eval_mode == "exact":
                    mean, sd = exact, 0.0
                else:
                    mean, sd = evaluate_policy(
                        learner, policy, "monte_carlo", cfg.n_per_state, cfg.horizon,
                        np.random.default_rng([seed, int(round(eps_e * 1e6)), int(round(eps_l * 1e6))]),
                    )
            ms = fit_ms + (time.perf_counter() - t1) * 1000 if cfg.record_timing else 0.0
            rows.append(
                ResultRow(env, eps_e, eps_l, alpha, method, int(seed), mean, sd, d, thm1,
                          l1, ms, exact_return=exact, gap_bound=gb, error=err)
            )
    _fill_best_alpha(rows)
    return rows


def _fill_best_alpha(rows):
    groups = {}
    for r in rows:
        if r.method == "robust" and r.return_mean is not None:
            groups.setdefault((r.eps_e, r.eps_l, r.seed), []).append(r)
    for grp in groups.values():
        best = max(grp, key=lambda r: (r.return_mean, -r.alpha))
        for r in grp:
            r.best_alpha = best.alpha


def _cell_worker(args):
    cfg, eps_e, eps_l = args
    return _run_cell(cfg, eps_e, eps_l)


def run_experiment(cfg: ExperimentConfig, cache=None):
    """Run every (eps_e, eps_l) cell and return rows in a deterministic order.

    `cache` (a dict) lets repeated calls in one process reuse fitted policies.
    """
    cells = [(float(e), float(l)) for e in cfg.eps_e_grid for l in cfg.eps_l_grid]
    rows = []
    if cfg.threads > 1 and cache is None:
        with ProcessPoolExecutor(cfg.threads) as ex:
            for part in ex.map(_cell_worker, [(cfg, e, l) for e, l in cells]):
                rows.extend(part)
    else:
        for e, l in cells:
            rows.extend(_run_cell(cfg, e, l, cache))
    rows.sort(key=ResultRow.sort_key)
    if cfg.output_path:
        emit_results(rows, cfg.output_path, "json" if cfg.output_path.endswith(".json") else "csv")
    return rows


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ROW_FIELDS)
    for r in sorted(rows, key=ResultRow.sort_key):
        w.writerow([_fmt(getattr(r, f)) for f in ROW_FIELDS])
    return buf.getvalue()


def rows_to_json(rows):
    out = []
    for r in sorted(rows, key=ResultRow.sort_key):
        out.append({f: getattr(r, f) for f in ROW_FIELDS})
    return json.dumps(out, indent=1, allow_nan=False) + "\n"


def emit_results(rows, path, format="csv"):
    if format not in ("csv", "json"):
        raise ConfigurationError(f"unknown format {format!r}")
    text = rows_to_csv(rows) if format == "csv" else rows_to_json(rows)
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as e:
        raise OSError(f"cannot write results to {path}: {e}") from e


def _parse_field(name, text):
    if text == "":
        return None
    if name in _STR_FIELDS:
        return text
    if name in _INT_FIELDS:
        return int(text)
    return float(text)


def parse_results(text, format="csv"):
    if format == "json":
        return [ResultRow(**d) for d in json.loads(text)]
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != ROW_FIELDS:
        raise ConfigurationError("unexpected CSV header")
    return [ResultRow(**{f: _parse_field(f, v) for f, v in zip(header, line)}) for line in reader]
