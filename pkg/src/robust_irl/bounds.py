"""Closed-form performance-gap bounds and related constants.

All functions are plain formula evaluators. Distances between dynamics or
policies that the formulas need are supplied by the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

from .mdp import DomainError


@dataclass(frozen=True)
class BoundInputs:
    gamma: float
    r_min: float
    r_max: float
    n_actions: int
    d_dyn: float = 0.0
    alpha: Optional[float] = None
    d_pol: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise DomainError("gamma must be in (0, 1)")
        if self.r_min > self.r_max:
            raise DomainError("r_min exceeds r_max")
        if self.n_actions < 1:
            raise DomainError("n_actions must be positive")
        _check_dist(self.d_dyn, "d_dyn")
        if self.alpha is not None and not 0 <= self.alpha <= 1:
            raise DomainError("alpha must be in [0, 1]")

    @property
    def r_abs_max(self):
        return max(abs(self.r_min), abs(self.r_max))

    @classmethod
    def from_reward(cls, gamma, reward_values, n_actions, **kw):
        return cls(gamma, float(min(reward_values)), float(max(reward_values)), n_actions, **kw)

    def with_(self, **kw):
        return replace(self, **kw)


def _check_dist(d, name):
    if not 0 <= d <= 2 + 1e-12:
        raise DomainError(f"{name} must be in [0, 2], got {d}")


def _scale(b):
    return b.r_abs_max / (1 - b.gamma) ** 2


def kappa(b: BoundInputs):
    log_a = math.log(b.n_actions)
    rad = b.gamma * max(b.r_max + log_a, -log_a - b.r_min)
    if rad < 0:
        raise DomainError("negative radicand: the policy-distance bound does not apply")
    return math.sqrt(rad)


def lemma1_pol_bound(b: BoundInputs):
    k, d, g = kappa(b), b.d_dyn, b.gamma
    raw = 2 * min(k * math.sqrt(d) / (1 - g), k * k * d / (1 - g) ** 2)
    return min(raw, 2.0)


def thm1_gap_bound(b: BoundInputs):
    return b.gamma * _scale(b) * b.d_dyn


def soft_expert_gap_bound(b: BoundInputs):
    g, r = b.gamma, b.r_abs_max
    return thm1_gap_bound(b) + 2 * kappa(b) * r * math.sqrt(b.d_dyn) / (1 - g) ** 3


def robust_gap_bound(b: BoundInputs):
    if b.alpha is None:
        raise DomainError("robust bound needs alpha")
    return _scale(b) * (b.gamma * b.d_dyn + 2 * (1 - b.alpha))


def reward_transfer_terms(b: BoundInputs, d_train_learner, kappa_train, d_pol_term):
    """Four terms of the reward-transfer bound, already scaled.

    b.d_dyn is the learner/expert distance."""
    _check_dist(d_train_learner, "d_train_learner")
    _check_dist(d_pol_term, "d_pol_term")
    g, s = b.gamma, _scale(b)
    return {
        "demonstration": s * g * b.d_dyn,
        "policy_shift": s * 2 * kappa_train * math.sqrt(d_train_learner) / (1 - g),
        "dynamics_shift": s * g * d_train_learner,
        "policy_gap": s * d_pol_term,
    }


def reward_transfer_bound(b: BoundInputs, d_train_learner, kappa_train, d_pol_term):
    return sum(reward_transfer_terms(b, d_train_learner, kappa_train, d_pol_term).values())


def reward_transfer_bound_simplified(b: BoundInputs, kappa_expert=None):
    """Variant with the training MDP equal to the expert's and the transferred
    policy equal to the soft-optimal one."""
    k = kappa(b) if kappa_expert is None else kappa_expert
    g = b.gamma
    return 2 * _scale(b) * (g * b.d_dyn + k * math.sqrt(b.d_dyn) / (1 - g))


def infeasible_gap_terms(b: BoundInputs, d_expert_tstar, d_pol_expert_player):
    """b.d_dyn is the expert/learner distance; alpha is required."""
    if b.alpha is None:
        raise DomainError("infeasible-case bound needs alpha")
    _check_dist(d_expert_tstar, "d_expert_tstar")
    _check_dist(d_pol_expert_player, "d_pol_expert_player")
    g, s, a = b.gamma, _scale(b), b.alpha
    return {
        "demonstration": g * s * b.d_dyn,
        "transfer": g * s * 2 * (1 - a) ** 2,
        "policy": s * d_pol_expert_player,
        "infeasibility": g * s * (a * b.d_dyn + (1 - a) * d_expert_tstar),
    }


def infeasible_gap_bound(b: BoundInputs, d_expert_tstar, d_pol_expert_player):
    return sum(infeasible_gap_terms(b, d_expert_tstar, d_pol_expert_player).values())


def corollary_alpha_choice(d_dyn_expert_learner, d_dyn_tstar_expert):
    _check_dist(d_dyn_expert_learner, "d_dyn_expert_learner")
    _check_dist(d_dyn_tstar_expert, "d_dyn_tstar_expert")
    return min(1.0, 1 - d_dyn_expert_learner / 4 + d_dyn_tstar_expert / 4)


def constructive_gaps(eps_e, gamma, alpha):
    """Closed-form gaps on the three-state example."""
    if not 0 <= eps_e <= 1 or not 0 < gamma < 1:
        raise DomainError("eps_e must be in [0, 1] and gamma in (0, 1)")
    if not 0 < alpha <= 1 or alpha < 1 - eps_e:
        raise DomainError(
            f"player policy not well-defined for alpha={alpha} < 1 - eps_e={1 - eps_e}"
        )
    h = gamma / (1 - gamma)
    return {
        "mce_gap": 2 * h * eps_e,
        "robust_gap": 2 * h * abs(alpha - (1 - eps_e)) / alpha,
        "player_a1_prob": (1 - eps_e) / alpha,
    }


FORMULAS = {
    "kappa": kappa,
    "lemma1": lemma1_pol_bound,
    "thm1": thm1_gap_bound,
    "soft-expert": soft_expert_gap_bound,
    "robust": robust_gap_bound,
    "reward-transfer": reward_transfer_bound,
    "reward-transfer-simplified": reward_transfer_bound_simplified,
    "infeasible": infeasible_gap_bound,
}
