"""Hard, soft and two-player soft value iteration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mdp import MAX_ITERS, ConvergenceError, DomainError

SOLVER_TOL = 1e-10


@dataclass(frozen=True)
class HardSolution:
    v_star: np.ndarray
    q_star: np.ndarray
    policy: np.ndarray
    iterations: int


@dataclass(frozen=True)
class SoftSolution:
    v_soft: np.ndarray
    q_soft: np.ndarray
    policy: np.ndarray
    iterations: int


@dataclass(frozen=True)
class TwoPlayerSolution:
    joint_q: np.ndarray  # (s, a_pl, a_op)
    v: np.ndarray
    player: np.ndarray
    opponent: np.ndarray
    q_pl: np.ndarray
    q_op: np.ndarray
    iterations: int


def logsumexp(x, axis=-1):
    m = x.max(axis=axis, keepdims=True)
    out = np.log(np.exp(x - m).sum(axis=axis, keepdims=True)) + m
    return out.squeeze(axis=axis)


def _lse_rows(q):
    m = q.max(axis=1)
    return np.log(np.exp(q - m[:, None]).sum(axis=1)) + m


def _next_values(mdp):
    s, a = mdp.n_states, mdp.n_actions
    flat = np.ascontiguousarray(mdp.transitions.reshape(s * a, s))
    return lambda v: (flat @ v).reshape(s, a)


def _check(tol, v_init, n):
    if tol <= 0:
        raise DomainError("tol must be positive")
    if v_init is None:
        return np.zeros(n)
    return np.array(v_init, dtype=float)


def value_iteration(mdp, tol=SOLVER_TOL, max_iters=MAX_ITERS, v_init=None):
    r = mdp.reward_vector()[:, None]
    tv = _next_values(mdp)
    g = mdp.gamma
    v = _check(tol, v_init, mdp.n_states)
    for k in range(1, max_iters + 1):
        q = r + g * tv(v)
        new = q.max(axis=1)
        delta = np.abs(new - v).max()
        v = new
        if delta <= tol:
            break
    else:
        raise ConvergenceError("value iteration did not converge", delta, max_iters)
    q = r + g * tv(v)
    v = q.max(axis=1)
    # argmax returns the lowest index among ties
    policy = np.zeros_like(q)
    policy[np.arange(q.shape[0]), q.argmax(axis=1)] = 1.0
    return HardSolution(v, q, policy, k)


def soft_value_iteration(mdp, tol=SOLVER_TOL, max_iters=MAX_ITERS, v_init=None):
    r = mdp.reward_vector()[:, None]
    tv = _next_values(mdp)
    g = mdp.gamma
    v = _check(tol, v_init, mdp.n_states)
    for k in range(1, max_iters + 1):
        q = r + g * tv(v)
        new = _lse_rows(q)
        delta = np.abs(new - v).max()
        v = new
        if delta <= tol:
            break
    else:
        raise ConvergenceError("soft value iteration did not converge", delta, max_iters)
    policy = np.exp(q - v[:, None])
    policy /= policy.sum(axis=1, keepdims=True)
    return SoftSolution(v, q, policy, k)


def two_player_transition(mdp, alpha):
    """T_two[s, a_pl, a_op, s'] = alpha T[s, a_pl, s'] + (1 - alpha) T[s, a_op, s']."""
    if not 0 <= alpha <= 1:
        raise DomainError(f"alpha must be in [0, 1], got {alpha}")
    t = mdp.transitions
    return alpha * t[:, :, None, :] + (1 - alpha) * t[:, None, :, :]


def two_player_soft_vi(mdp, alpha, tol=SOLVER_TOL, max_iters=MAX_ITERS, v_init=None):
    """Soft value iteration for the player against a greedy opponent.

    The joint Q is separable in the two actions, so the inner minimum over the
    opponent reduces to a minimum over next-state values.
    """
    if not 0 <= alpha <= 1:
        raise DomainError(f"alpha must be in [0, 1], got {alpha}")
    r = mdp.reward_vector()[:, None]
    tv = _next_values(mdp)
    g = mdp.gamma
    v = _check(tol, v_init, mdp.n_states)
    beta = 1 - alpha
    for k in range(1, max_iters + 1):
        nv = tv(v)
        q_pl = r + g * (alpha * nv + beta * nv.min(axis=1, keepdims=True))
        new = _lse_rows(q_pl)
        delta = np.abs(new - v).max()
        v = new
        if delta <= tol:
            break
    else:
        raise ConvergenceError("two-player soft value iteration did not converge", delta, max_iters)
    joint = r[:, :, None] + g * (alpha * nv[:, :, None] + beta * nv[:, None, :])
    player = np.exp(q_pl - v[:, None])
    player /= player.sum(axis=1, keepdims=True)
    q_op = logsumexp(joint, axis=1)
    opponent = np.zeros_like(q_op)
    opponent[np.arange(q_op.shape[0]), q_op.argmin(axis=1)] = 1.0
    return TwoPlayerSolution(joint, v, player, opponent, q_pl, q_op, k)
