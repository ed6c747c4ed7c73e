"""Rank test for whether a learner MDP can reproduce a given state occupancy.

The unknowns are the policy entries pi(a|s), stacked state-major as column
``s * n_actions + a``. The first block of rows encodes the discounted flow
equations, the second block the per-state normalization.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .mdp import DomainError, ShapeError, flow_residual

RANK_TOL = 1e-9
WITNESS_RESIDUAL = 1e-8
NEG_TOL = 1e-9


@dataclass
class FlowSystem:
    t_matrix: np.ndarray
    v_vector: np.ndarray
    n_states: int
    n_actions: int
    rank_t: Optional[int] = None
    rank_augmented: Optional[int] = None
    feasible: Optional[bool] = None
    full_rank: Optional[bool] = None


@dataclass
class InfeasibilityReport:
    residual: float
    most_negative: float
    witness: np.ndarray


def build_flow_system(learner, rho):
    rho = np.asarray(rho, float)
    s, a = learner.n_states, learner.n_actions
    if rho.shape != (s,):
        raise ShapeError(f"rho must have length {s}")
    t = np.zeros((2 * s, s * a))
    # entry (s_i, s'*A + a_j) = gamma * rho(s') * T(s_i | s', a_j)
    flow = learner.gamma * rho[:, None, None] * learner.transitions  # [s', a, s_i]
    t[:s] = flow.reshape(s * a, s).T
    for sp in range(s):
        t[s + sp, sp * a : (sp + 1) * a] = 1.0
    v = np.ones(2 * s)
    v[:s] = rho - (1 - learner.gamma) * learner.p0
    return FlowSystem(t, v, s, a)


def numerical_rank(m, rel_tol=RANK_TOL):
    """Rank by Gaussian elimination with partial pivoting.

    A pivot counts when it exceeds rel_tol times the largest absolute entry of
    the input matrix.
    """
    if not 0 < rel_tol < 1:
        raise DomainError("rel_tol must be in (0, 1)")
    m = np.array(m, dtype=float)
    if m.size == 0:
        return 0
    thresh = rel_tol * np.abs(m).max()
    if thresh == 0:
        return 0
    rows, cols = m.shape
    rank = 0
    for c in range(cols):
        if rank == rows:
            break
        p = rank + int(np.argmax(np.abs(m[rank:, c])))
        if abs(m[p, c]) <= thresh:
            continue
        m[[rank, p]] = m[[p, rank]]
        below = m[rank + 1 :, c] / m[rank, c]
        m[rank + 1 :] -= np.outer(below, m[rank])
        rank += 1
    return rank


def check_feasibility(learner, rho, rel_tol=RANK_TOL):
    fs = build_flow_system(learner, rho)
    aug = np.column_stack([fs.t_matrix, fs.v_vector])
    fs.rank_t = numerical_rank(fs.t_matrix, rel_tol)
    fs.rank_augmented = numerical_rank(aug, rel_tol)
    fs.feasible = fs.rank_t == fs.rank_augmented
    fs.full_rank = fs.rank_t == 2 * fs.n_states
    return fs


def least_squares_witness(fs):
    x, *_ = np.linalg.lstsq(fs.t_matrix, fs.v_vector, rcond=None)
    residual = float(np.linalg.norm(fs.t_matrix @ x - fs.v_vector))
    return x, residual


def solve_matching_policy(fs):
    """Minimum-norm solution of T pi = v, returned as a policy table when it is
    consistent and (up to tolerance) nonnegative, else an InfeasibilityReport."""
    x, residual = least_squares_witness(fs)
    most_negative = float(min(x.min(), 0.0))
    if residual > WITNESS_RESIDUAL or most_negative < -NEG_TOL:
        return InfeasibilityReport(residual, most_negative, x)
    pi = np.clip(x.reshape(fs.n_states, fs.n_actions), 0.0, None)
    return pi / pi.sum(axis=1, keepdims=True)


def witness_flow_residual(learner, rho, policy):
    return flow_residual(learner, policy, rho)
