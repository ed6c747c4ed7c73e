"""MCE IRL and its robust two-player variant, both driven by Adam."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .mdp import (
    OCC_TOL,
    ConvergenceError,
    DomainError,
    RewardModel,
    ShapeError,
    mix_policies,
    soft_return,
    state_occupancy,
)
from .solvers import SOLVER_TOL, soft_value_iteration, two_player_soft_vi


@dataclass
class IrlConfig:
    learning_rate: float = 0.5
    adam_beta1: float = 0.9
    adam_beta2: float = 0.99
    adam_eps: float = 1e-7
    weight_decay: float = 0.0
    n_steps: int = 200
    inner_tol: float = SOLVER_TOL
    occupancy_tol: float = OCC_TOL
    theta_init: Optional[np.ndarray] = None
    grad_tol: Optional[float] = None  # early stop on gradient norm, off by default
    warm_start: bool = True

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise DomainError("learning_rate must be positive")
        for b in (self.adam_beta1, self.adam_beta2):
            if not 0 <= b < 1:
                raise DomainError("Adam betas must be in [0, 1)")
        if self.n_steps < 1:
            raise DomainError("n_steps must be at least 1")
        if self.adam_eps <= 0 or self.weight_decay < 0:
            raise DomainError("adam_eps must be positive and weight_decay nonnegative")

    @classmethod
    def objectworld(cls, **kw):
        base = dict(learning_rate=1e-3, adam_beta2=0.999, adam_eps=1e-8, weight_decay=0.01)
        base.update(kw)
        return cls(**base)


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray

    @classmethod
    def zeros(cls, n):
        return cls(np.zeros(n), np.zeros(n))


@dataclass
class IrlResult:
    theta: np.ndarray
    policy: np.ndarray
    gradient_norm_history: list
    final_l1_mismatch: float
    l1_history: list = field(default_factory=list)
    theta_history: list = field(default_factory=list)
    opponent: Optional[np.ndarray] = None
    player_l1_mismatch: Optional[float] = None


def adam_step(theta, grad, state, cfg, step_index):
    """One Adam update with bias correction and decoupled weight decay."""
    theta = np.asarray(theta, float)
    grad = np.asarray(grad, float)
    if theta.shape != grad.shape or state.m.shape != theta.shape:
        raise ShapeError(f"theta {theta.shape}, grad {grad.shape}, moments {state.m.shape}")
    if step_index < 1:
        raise DomainError("step_index starts at 1")
    lr = cfg.learning_rate
    if cfg.weight_decay > 0:
        theta = theta - lr * cfg.weight_decay * theta
    b1, b2 = cfg.adam_beta1, cfg.adam_beta2
    m = b1 * state.m + (1 - b1) * grad
    v = b2 * state.v + (1 - b2) * grad * grad
    m_hat = m / (1 - b1**step_index)
    v_hat = v / (1 - b2**step_index)
    theta = theta - lr * m_hat / (np.sqrt(v_hat) + cfg.adam_eps)
    return theta, AdamState(m, v)


def _solver(alpha):
    if alpha is None:
        return lambda mdp, tol, v0: soft_value_iteration(mdp, tol, v_init=v0)
    return lambda mdp, tol, v0: two_player_soft_vi(mdp, alpha, tol, v_init=v0)


def _run(learner, rho_target, features, cfg, alpha, callback):
    features = np.asarray(features, float)
    rho_target = np.asarray(rho_target, float)
    if features.shape[0] != learner.n_states or rho_target.shape != (learner.n_states,):
        raise ShapeError("features and rho_target must have one entry per learner state")
    theta = (
        np.zeros(features.shape[1])
        if cfg.theta_init is None
        else np.array(cfg.theta_init, dtype=float)
    )
    if theta.shape != (features.shape[1],):
        raise ShapeError("theta_init has the wrong length")
    solve = _solver(alpha)

    def game(theta, v0, step):
        mdp = learner.with_reward(RewardModel(features, theta))
        try:
            return solve(mdp, cfg.inner_tol, v0)
        except ConvergenceError as e:
            raise ConvergenceError(
                f"inner solver failed at IRL step {step}", e.residual, e.iterations
            ) from e

    def behaviour(sol):
        if alpha is None:
            return sol.policy
        return mix_policies(sol.player, sol.opponent, alpha)

    sol = game(theta, None, 0)
    adam = AdamState.zeros(theta.size)
    grad_hist, l1_hist, theta_hist = [], [], [theta.copy()]
    for step in range(1, cfg.n_steps + 1):
        rho = state_occupancy(learner, behaviour(sol), cfg.occupancy_tol)
        diff = rho - rho_target
        grad = features.T @ diff
        gnorm = float(np.linalg.norm(grad))
        l1 = float(np.abs(diff).sum())
        grad_hist.append(gnorm)
        l1_hist.append(l1)
        if callback is not None:
            callback(step, gnorm, l1)
        if cfg.grad_tol is not None and gnorm <= cfg.grad_tol:
            break
        theta, adam = adam_step(theta, grad, adam, cfg, step)
        theta_hist.append(theta.copy())
        v0 = (sol.v_soft if alpha is None else sol.v) if cfg.warm_start else None
        sol = game(theta, v0, step)

    rho = state_occupancy(learner, behaviour(sol), cfg.occupancy_tol)
    final_l1 = float(np.abs(rho - rho_target).sum())
    if alpha is None:
        return IrlResult(theta, sol.policy, grad_hist, final_l1, l1_hist, theta_hist)
    rho_pl = state_occupancy(learner, sol.player, cfg.occupancy_tol)
    return IrlResult(
        theta,
        sol.player,
        grad_hist,
        final_l1,
        l1_hist,
        theta_hist,
        opponent=sol.opponent,
        player_l1_mismatch=float(np.abs(rho_pl - rho_target).sum()),
    )


def mce_irl(learner, rho_target, features, cfg=None, callback: Optional[Callable] = None):
    """Standard MCE IRL: match the target occupancy with the soft-optimal policy."""
    return _run(learner, rho_target, features, cfg or IrlConfig(), None, callback)


def robust_mce_irl(learner, rho_target, alpha, features, cfg=None, callback=None):
    """Robust MCE IRL: match the target with the player/opponent mixture occupancy."""
    if not 0 < alpha <= 1:
        raise DomainError(f"alpha must be in (0, 1], got {alpha}")
    return _run(learner, rho_target, features, cfg or IrlConfig(), float(alpha), callback)


def dual_objective(learner, rho_target, features, theta, tol=1e-12):
    """Dual U(theta): entropy-regularized value of the soft-optimal policy minus
    the target's feature reward, with occupancies normalized to sum to one.

    Its gradient is features^T (rho_soft - rho_target).
    """
    features = np.asarray(features, float)
    mdp = learner.with_reward(RewardModel(features, theta))
    pi = soft_value_iteration(mdp, tol).policy
    value = (1 - learner.gamma) * soft_return(mdp, pi, tol)
    return value - float(np.asarray(theta) @ (features.T @ rho_target))


def occupancy_gradient(learner, rho_target, features, theta, tol=1e-12):
    features = np.asarray(features, float)
    mdp = learner.with_reward(RewardModel(features, theta))
    pi = soft_value_iteration(mdp, tol).policy
    rho = state_occupancy(learner, pi, tol)
    return features.T @ (rho - rho_target)
