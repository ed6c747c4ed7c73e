import numpy as np
import pytest

from robust_irl.continuous import (
    START,
    GaussianGrid,
    LinearGaussianPolicy,
    PgConfig,
    ReIrlConfig,
    Rollouts,
    _guard,
    features,
    gaussian_grid_step,
    in_goal,
    re_irl_gradient,
    reinforce_gradient,
    relative_entropy_irl,
    returns_to_go,
    softmax_weights,
    true_reward,
    two_player_policy_gradient,
)
from robust_irl.mdp import ConvergenceError, DomainError


class FixedDraw:
    """Stand-in rng whose uniform draw picks the dynamics branch."""

    def __init__(self, u):
        self.u = u

    def random(self):
        return self.u


def test_step_examples():
    s, r, done = gaussian_grid_step(START, [0.5, -0.5], 0.3, FixedDraw(0.9))
    assert np.allclose(s, [0.05, 0.95]) and not done
    s, _, _ = gaussian_grid_step(START, [0.5, -0.5], 0.3, FixedDraw(0.1))
    assert np.allclose(s, [0.0, 0.9])
    s, _, _ = gaussian_grid_step([0.0, 0.0], [0.2, 0.2], 1.0, FixedDraw(0.0))
    assert np.array_equal(s, [0.0, 0.0])
    s, _, _ = gaussian_grid_step(START, [9.0, 9.0], 0.0, FixedDraw(0.5))
    assert np.allclose(s, [0.05, 1.0])  # action clipped, state clamped
    with pytest.raises(DomainError):
        gaussian_grid_step(START, [0, 0], 1.5, FixedDraw(0.5))


def test_goal_and_reward():
    s, r, done = gaussian_grid_step([0.99, -0.99], [0.5, -0.5], 0.0, FixedDraw(0.5))
    assert done and np.allclose(s, [1.0, -1.0])
    assert r == pytest.approx(10 - 80 * np.exp(-16), abs=1e-12)
    assert not in_goal([0.9, -1.0]) and not in_goal(START)


def test_features():
    assert np.allclose(features([0.0, 0.0]), [0, 0, 0, 0, 1, 0, 1])
    assert np.allclose(features([1.0, -1.0]), [1, 1, 1, -1, np.exp(-16), 1, 1])
    pts = np.random.default_rng(0).uniform([0, -1], [1, 1], (50, 2))
    assert np.all(features(pts)[:, -1] == 1)
    theta = np.array([-1.0, -1.0, 2.0, -2.0, -80.0, 10.0, -2.0])
    assert np.allclose(features(pts) @ theta, true_reward(pts))


def test_softmax_matches_reference(rng):
    for _ in range(20):
        z = rng.normal(scale=50, size=30)
        w = softmax_weights(z)
        ref = np.exp(z - z.max()) / np.exp(z - z.max()).sum()
        assert np.allclose(w, ref, atol=1e-15) and abs(w.sum() - 1) <= 1e-12


def test_re_irl_gradient_examples(rng):
    phi_e = rng.random(7)
    g, _ = re_irl_gradient(phi_e, np.tile(phi_e, (5, 1)), rng.normal(size=7))
    assert np.allclose(g, 0)
    pair = rng.random((2, 7))
    g, w = re_irl_gradient(phi_e, pair, np.zeros(7))
    assert np.allclose(w, 0.5) and np.allclose(g, phi_e - pair.mean(axis=0))


def test_log_prob_gradient_matches_finite_differences(rng):
    pol = LinearGaussianPolicy(rng.normal(size=(2, 7)), rng.normal(scale=0.3, size=2))
    phi = features(rng.uniform([0, -1], [1, 1], 2))
    a = rng.normal(size=2)
    g_w, g_s = pol.grad_log_prob(phi, a)
    h = 1e-6
    for i in range(2):
        for j in range(7):
            p, m = pol.copy(), pol.copy()
            p.weights[i, j] += h
            m.weights[i, j] -= h
            assert abs((p.log_prob(phi, a) - m.log_prob(phi, a)) / (2 * h) - g_w[i, j]) <= 1e-5
        p, m = pol.copy(), pol.copy()
        p.log_std[i] += h
        m.log_std[i] -= h
        assert abs((p.log_prob(phi, a) - m.log_prob(phi, a)) / (2 * h) - g_s[i]) <= 1e-5


def test_seed_determinism():
    env = GaussianGrid(0.2, horizon=30)
    pl, op = LinearGaussianPolicy(), LinearGaussianPolicy(np.full((2, 7), 0.1))
    a = env.rollout(8, np.random.default_rng(5), pl, op, 0.7)
    b = env.rollout(8, np.random.default_rng(5), pl, op, 0.7)
    for f in ("states", "player_actions", "opponent_actions", "player_control", "rewards"):
        assert np.array_equal(getattr(a, f), getattr(b, f))


def test_rollout_invariants():
    env = GaussianGrid(0.1, horizon=200)
    pol = LinearGaussianPolicy(np.array([[0, 0, 0, 0, 0, 0, 0.5], [0, 0, -3, 0, 0, 0, 1]]))
    ro = env.rollout(20, np.random.default_rng(0), pol)
    assert np.all(ro.states[..., 0] >= 0) and np.all(ro.states[..., 0] <= 1)
    assert np.all(np.abs(ro.states[..., 1]) <= 1)
    for i in range(ro.n):
        tr = ro.trajectory(i)
        k = len(tr.rewards)
        assert len(tr.states) == k + 1 and len(tr.player_actions) == k
        goal = in_goal(tr.states[1:])
        # the episode ends on its first goal visit, or at the horizon
        assert not goal[:-1].any()
        assert goal[-1] or k == env.horizon
        assert np.allclose(tr.feature_means, features(tr.states).mean(axis=0))


def test_returns_to_go():
    r = np.array([[1.0], [2.0], [4.0]])
    alive = np.array([[True], [True], [False]])
    g = returns_to_go(r, alive, 0.5)
    assert np.allclose(g[:, 0], [2.0, 2.0, 0.0])


def _two_step_rollouts(pol, n, rng, s1, target):
    """Two decisions from fixed states; reward -(a_x - target)^2 on the clipped-free action."""
    states = np.empty((3, n, 2))
    states[0] = START
    states[1] = s1
    states[2] = s1
    acts = np.stack([pol.sample(features(states[t]), rng) for t in range(2)])
    rew = -((acts[..., 0] - target) ** 2)
    ones = np.ones((2, n), bool)
    return Rollouts(states, acts, np.zeros_like(acts), ones, ones, rew, rew)


def test_reinforce_matches_analytic_gradient():
    gamma, target = 0.9, 0.2
    s1 = np.array([0.5, 0.0])
    pol = LinearGaussianPolicy(np.random.default_rng(1).normal(scale=0.2, size=(2, 7)), np.log([0.3, 0.4]))
    phi0, phi1 = features(START), features(s1)
    mu0, mu1 = pol.mean(phi0)[0], pol.mean(phi1)[0]
    sx = np.exp(pol.log_std[0])
    # E[G] = -(mu0 - c)^2 - sx^2 - gamma((mu1 - c)^2 + sx^2)
    grad_w = np.zeros((2, 7))
    grad_w[0] = -2 * (mu0 - target) * phi0 - gamma * 2 * (mu1 - target) * phi1
    grad_s = np.array([-2 * sx**2 * (1 + gamma), 0.0])
    exact = np.concatenate([grad_w.ravel(), grad_s])

    rng = np.random.default_rng(2)
    est = np.array([
        reinforce_gradient(pol, _two_step_rollouts(pol, 1000, rng, s1, target), "player", gamma,
                           baseline=False)
        for _ in range(100)
    ])
    mean, se = est.mean(axis=0), est.std(axis=0, ddof=1) / np.sqrt(len(est))
    assert np.all(np.abs(mean - exact) <= 3 * se + 1e-12)


def test_zero_reward_leaves_policies_unchanged():
    env = GaussianGrid(0.2, horizon=20)
    pl, op = two_player_policy_gradient(env, np.zeros(7), 0.8, PgConfig(n_outer=50, n_traj=5),
                                        np.random.default_rng(0))
    assert np.all(pl.weights == 0) and np.all(op.weights == 0)
    assert np.allclose(pl.log_std, np.log(0.3))


def test_alpha_one_gates_opponent():
    env = GaussianGrid(0.0, horizon=20)
    op0 = LinearGaussianPolicy(np.full((2, 7), 0.05))
    theta = np.array([-1.0, -1.0, 2.0, -2.0, -80.0, 10.0, -2.0])
    pl, op = two_player_policy_gradient(env, theta, 1.0, PgConfig(n_outer=10, n_traj=5),
                                        np.random.default_rng(0), opponent=op0)
    assert np.array_equal(op.weights, op0.weights) and np.array_equal(op.log_std, op0.log_std)
    assert not np.array_equal(pl.weights, 0)
    ro = env.rollout(5, np.random.default_rng(1), pl, op0, 1.0)
    assert np.all(ro.player_control)
    g = reinforce_gradient(op0, ro, "opponent", env.gamma)
    assert np.all(g == 0)


def test_divergence_guard():
    with pytest.raises(ConvergenceError):
        _guard(LinearGaussianPolicy(np.full((2, 7), 2e3)))


def test_degenerate_dataset_warns():
    # a zero-length horizon would be invalid, so pin every trajectory to the start corner
    env = GaussianGrid(0.0, horizon=3)
    cfg = ReIrlConfig(n_iters=2, n_theta=2, dataset_size=4, pg=PgConfig(n_outer=1, n_traj=2))
    stuck = LinearGaussianPolicy(np.array([[0, 0, 0, 0, 0, 0, -50.0], [0, 0, 0, 0, 0, 0, 50.0]]),
                                 np.log([1e-3, 1e-3]))
    orig = env.rollout

    def rollout(n, rng, player=None, *a, **k):
        return orig(n, rng, stuck)

    env.rollout = rollout
    with pytest.warns(RuntimeWarning):
        res = relative_entropy_irl(env, features(START), 1.0, cfg, np.random.default_rng(0))
    assert np.all(np.isfinite(res.theta))


def test_relative_entropy_irl_alpha_domain():
    with pytest.raises(DomainError):
        relative_entropy_irl(GaussianGrid(), np.zeros(7), 0.0, ReIrlConfig(), np.random.default_rng(0))
