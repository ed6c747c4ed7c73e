"""Finite MDPs, linear rewards, occupancy measures and return evaluation.

Transitions are stored dense as ``T[s, a, s']``. Policies are plain
``(n_states, n_actions)`` arrays of probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

PROB_TOL = 1e-12
OCC_TOL = 1e-10
MAX_ITERS = 100_000


class ShapeError(ValueError):
    """Array dimensions do not agree."""


class DomainError(ValueError):
    """A scalar argument lies outside its admissible range."""


class ConfigurationError(ValueError):
    """A required piece of the model is missing or malformed."""


class ConvergenceError(RuntimeError):
    """An iterative routine hit its iteration cap."""

    def __init__(self, msg, residual=float("nan"), iterations=0):
        super().__init__(f"{msg} (residual={residual:.3e}, iterations={iterations})")
        self.residual = residual
        self.iterations = iterations


def _frozen(x):
    a = np.array(x, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RewardModel:
    """Linear reward R(s) = <theta, phi(s)> over a feature matrix of shape (S, d)."""

    features: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        phi = _frozen(self.features)
        th = _frozen(self.theta)
        if phi.ndim != 2 or th.ndim != 1 or phi.shape[1] != th.shape[0]:
            raise ShapeError(f"features {phi.shape} incompatible with theta {th.shape}")
        object.__setattr__(self, "features", phi)
        object.__setattr__(self, "theta", th)

    @classmethod
    def one_hot(cls, values):
        values = np.asarray(values, dtype=float)
        return cls(np.eye(values.size), values)

    @property
    def values(self):
        return self.features @ self.theta

    @property
    def r_min(self):
        return float(self.values.min())

    @property
    def r_max(self):
        return float(self.values.max())

    @property
    def r_abs_max(self):
        return max(abs(self.r_min), abs(self.r_max))

    def with_theta(self, theta):
        return RewardModel(self.features, theta)


@dataclass(frozen=True)
class TabularMdp:
    transitions: np.ndarray  # T[s, a, s']
    gamma: float
    p0: np.ndarray
    reward: Optional[RewardModel] = field(default=None)

    def __post_init__(self):
        t = _frozen(self.transitions)
        p0 = _frozen(self.p0)
        if t.ndim != 3 or t.shape[0] != t.shape[2]:
            raise ShapeError(f"transitions must be (S, A, S), got {t.shape}")
        if t.shape[0] < 1 or t.shape[1] < 1:
            raise ShapeError("need at least one state and one action")
        if p0.shape != (t.shape[0],):
            raise ShapeError(f"p0 shape {p0.shape} does not match {t.shape[0]} states")
        if not np.all(np.isfinite(t)) or t.min() < 0 or t.max() > 1:
            raise DomainError("transition probabilities must lie in [0, 1]")
        dev = np.abs(t.sum(axis=2) - 1).max()
        if dev > PROB_TOL:
            raise DomainError(f"transition rows must sum to 1 (max deviation {dev:.3e})")
        if not np.all(np.isfinite(p0)) or p0.min() < 0 or abs(p0.sum() - 1) > PROB_TOL:
            raise DomainError("p0 must be a probability vector")
        if not 0 < self.gamma < 1:
            raise DomainError(f"gamma must be in (0, 1), got {self.gamma}")
        if self.reward is not None and self.reward.features.shape[0] != t.shape[0]:
            raise ShapeError("reward features must have one row per state")
        object.__setattr__(self, "transitions", t)
        object.__setattr__(self, "p0", p0)
        object.__setattr__(self, "gamma", float(self.gamma))

    @property
    def n_states(self):
        return self.transitions.shape[0]

    @property
    def n_actions(self):
        return self.transitions.shape[1]

    def with_reward(self, reward):
        return TabularMdp(self.transitions, self.gamma, self.p0, reward)

    def with_transitions(self, transitions):
        return TabularMdp(transitions, self.gamma, self.p0, self.reward)

    def reward_vector(self):
        if self.reward is None:
            raise ConfigurationError("MDP has no reward attached")
        return self.reward.values


def check_policy(policy, n_states=None, n_actions=None, tol=PROB_TOL):
    """Validate a row-stochastic policy table and return it as an array."""
    p = np.asarray(policy, dtype=float)
    if p.ndim != 2:
        raise ShapeError(f"policy must be 2-d, got shape {p.shape}")
    if n_states is not None and p.shape != (n_states, n_actions):
        raise ShapeError(f"policy shape {p.shape} != ({n_states}, {n_actions})")
    if not np.all(np.isfinite(p)) or p.min() < 0 or p.max() > 1:
        raise DomainError("policy entries must lie in [0, 1]")
    dev = np.abs(p.sum(axis=1) - 1).max()
    if dev > tol:
        raise DomainError(f"policy rows must sum to 1 (max deviation {dev:.3e})")
    return p


def uniform_policy(n_states, n_actions):
    return np.full((n_states, n_actions), 1.0 / n_actions)


def deterministic_policy(actions, n_actions):
    actions = np.asarray(actions, dtype=int)
    p = np.zeros((actions.size, n_actions))
    p[np.arange(actions.size), actions] = 1.0
    return p


def policy_transition_matrix(mdp, policy):
    """P_pi[s, s'] = sum_a pi(a|s) T(s'|s, a)."""
    return np.einsum("sa,sat->st", policy, mdp.transitions)


def state_occupancy(mdp, policy, tol=OCC_TOL, max_iters=MAX_ITERS):
    """Normalized discounted state occupancy by fixed-point iteration.

    Successive l1 changes shrink by exactly gamma, so stopping once
    gamma / (1 - gamma) * |change|_1 <= tol bounds the remaining l1 error by tol.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    policy = check_policy(policy, mdp.n_states, mdp.n_actions)
    pt = policy_transition_matrix(mdp, policy).T.copy()
    base = (1 - mdp.gamma) * mdp.p0
    rho = base.copy()
    g = mdp.gamma
    scale = g / (1 - g)
    for k in range(1, max_iters + 1):
        new = base + g * (pt @ rho)
        delta = scale * np.abs(new - rho).sum()
        rho = new
        if delta <= tol:
            return rho
    raise ConvergenceError("state occupancy did not converge", delta, max_iters)


def exact_occupancy(mdp, policy):
    """Direct solve of (I - gamma P_pi^T) rho = (1 - gamma) P0."""
    pt = policy_transition_matrix(mdp, policy).T
    a = np.eye(mdp.n_states) - mdp.gamma * pt
    return np.linalg.solve(a, (1 - mdp.gamma) * mdp.p0)


def flow_residual(mdp, policy, rho):
    """Per-state violation of the Bellman flow constraints."""
    pt = policy_transition_matrix(mdp, policy).T
    return np.abs(rho - (1 - mdp.gamma) * mdp.p0 - mdp.gamma * pt @ rho)


def dyn_distance(t1, t2):
    t1, t2 = np.asarray(t1, float), np.asarray(t2, float)
    if t1.shape != t2.shape:
        raise ShapeError(f"transition shapes differ: {t1.shape} vs {t2.shape}")
    return float(np.abs(t1 - t2).sum(axis=-1).max())


def pol_distance(p1, p2):
    p1, p2 = np.asarray(p1, float), np.asarray(p2, float)
    if p1.shape != p2.shape:
        raise ShapeError(f"policy shapes differ: {p1.shape} vs {p2.shape}")
    return float(np.abs(p1 - p2).sum(axis=-1).max())


def _check_unit(x, name):
    if not 0 <= x <= 1:
        raise DomainError(f"{name} must be in [0, 1], got {x}")


def mix_dynamics(t_ref, t_bar, eps):
    _check_unit(eps, "eps")
    t_ref, t_bar = np.asarray(t_ref, float), np.asarray(t_bar, float)
    if t_ref.shape != t_bar.shape:
        raise ShapeError("cannot mix transition tensors of different shapes")
    if eps == 0:
        return t_ref.copy()
    if eps == 1:
        return t_bar.copy()
    return (1 - eps) * t_ref + eps * t_bar


def mix_policies(p_pl, p_op, alpha):
    _check_unit(alpha, "alpha")
    p_pl, p_op = np.asarray(p_pl, float), np.asarray(p_op, float)
    if p_pl.shape != p_op.shape:
        raise ShapeError("cannot mix policies of different shapes")
    if alpha == 1:
        return p_pl.copy()
    if alpha == 0:
        return p_op.copy()
    return alpha * p_pl + (1 - alpha) * p_op


def entropy(policy):
    """Per-state Shannon entropy in nats, with 0 log 0 = 0."""
    p = np.asarray(policy, float)
    logp = np.log(np.where(p > 0, p, 1.0))
    return -(p * logp).sum(axis=1)


def expected_return(mdp, policy, tol=OCC_TOL):
    r = mdp.reward_vector()
    rho = state_occupancy(mdp, policy, tol)
    return float(r @ rho / (1 - mdp.gamma))


def soft_return(mdp, policy, tol=OCC_TOL):
    r = mdp.reward_vector()
    rho = state_occupancy(mdp, policy, tol)
    return float(rho @ (r + entropy(policy)) / (1 - mdp.gamma))
