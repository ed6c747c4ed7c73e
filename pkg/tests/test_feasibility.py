import numpy as np
import pytest

from conftest import random_mdp, random_policy
from robust_irl.envs import make_constructive
from robust_irl.feasibility import (
    InfeasibilityReport,
    build_flow_system,
    check_feasibility,
    least_squares_witness,
    numerical_rank,
    solve_matching_policy,
)
from robust_irl.mdp import TabularMdp, deterministic_policy, flow_residual, state_occupancy


def chain(p_stay, gamma=0.9):
    t = np.array([[[p_stay, 1 - p_stay]], [[1 - p_stay, p_stay]]])
    return TabularMdp(t, gamma, [1.0, 0.0])


def test_single_state_system():
    m = TabularMdp(np.ones((1, 1, 1)), 0.7, [1.0])
    fs = build_flow_system(m, [1.0])
    assert np.allclose(fs.t_matrix, [[0.7], [1.0]])
    assert np.allclose(fs.v_vector, [0.7, 1.0])


def test_constructive_block_by_hand():
    learner = make_constructive(0.0)
    expert = make_constructive(0.1)
    rho = state_occupancy(expert, deterministic_policy([0, 0, 0], 2))
    fs = build_flow_system(learner, rho)
    g = learner.gamma
    by_hand = np.zeros((6, 6))
    for sp in range(3):
        for a in range(2):
            for si in range(3):
                by_hand[si, sp * 2 + a] = g * rho[sp] * learner.transitions[sp, a, si]
        by_hand[3 + sp, 2 * sp : 2 * sp + 2] = 1
    assert np.allclose(fs.t_matrix, by_hand)
    assert np.allclose(fs.v_vector[:3], rho - (1 - g) * learner.p0)
    assert np.all(fs.v_vector[3:] == 1)


def test_normalization_rows_sum_to_action_count(rng):
    m = random_mdp(rng, 3, 4, reward=False)
    fs = build_flow_system(m, np.full(3, 1 / 3))
    assert np.all(fs.t_matrix[3:].sum(axis=1) == 4)


def test_numerical_rank_cases(rng):
    assert numerical_rank(np.eye(3)) == 3
    m = rng.normal(size=(4, 5))
    m = np.vstack([m, m[1]])
    assert numerical_rank(m) == 4
    a = rng.uniform(-1, 1, (6, 4))
    b = rng.uniform(-1, 1, (4, 8))
    assert numerical_rank(a @ b) == 4
    assert numerical_rank(np.zeros((0, 3))) == 0


def test_same_mdp_is_feasible(rng):
    m = random_mdp(rng, 4, 3, reward=False)
    pi = random_policy(rng, 4, 3)
    rho = state_occupancy(m, pi)
    fs = check_feasibility(m, rho)
    assert fs.feasible
    rec = solve_matching_policy(fs)
    assert not isinstance(rec, InfeasibilityReport)
    assert np.abs(state_occupancy(m, rec) - rho).max() < 1e-6


def test_constructive_mismatch_feasible():
    learner = make_constructive(0.0)
    rho = state_occupancy(make_constructive(0.1), deterministic_policy([0, 0, 0], 2))
    fs = check_feasibility(learner, rho)
    assert fs.feasible
    pi = solve_matching_policy(fs)
    assert pi[0, 0] == pytest.approx(0.9, abs=1e-6)
    assert flow_residual(learner, pi, rho).max() <= 1e-9


def test_forced_chain_infeasible():
    rho = state_occupancy(chain(0.3), [[1.0], [1.0]])
    fs = check_feasibility(chain(0.8), rho)
    assert not fs.feasible
    _, res = least_squares_witness(fs)
    assert res > 1e-6
    rep = solve_matching_policy(fs)
    assert isinstance(rep, InfeasibilityReport) and rep.residual > 1e-6


def test_full_rank_implies_feasible(rng):
    for _ in range(50):
        m = random_mdp(rng, 3, 3, reward=False)
        rho = rng.dirichlet(np.ones(3))
        fs = check_feasibility(m, rho)
        if fs.full_rank:
            assert fs.feasible


def test_witness_satisfies_flow(rng):
    for _ in range(30):
        m = random_mdp(rng, 3, 2, reward=False)
        other = random_mdp(rng, 3, 2, reward=False)
        rho = state_occupancy(other, random_policy(rng, 3, 2))
        fs = check_feasibility(m, rho)
        rec = solve_matching_policy(fs)
        if not isinstance(rec, InfeasibilityReport):
            assert flow_residual(m, rec, rho).max() <= 1e-6
