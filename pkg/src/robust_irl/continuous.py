"""Continuous 2-d navigation task, linear-Gaussian policies, REINFORCE for the
player/opponent game, and relative-entropy IRL on trajectory feature means."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .mdp import ConvergenceError, DomainError, ShapeError

N_FEATURES = 7
TRUE_THETA = np.array([-1.0, -1.0, 2.0, -2.0, -80.0, 10.0, -2.0])
START = np.array([0.0, 1.0])
ACTION_LOW, ACTION_HIGH = -0.5, 0.5
X_BOUNDS = (0.0, 1.0)
Y_BOUNDS = (-1.0, 1.0)
DIVERGENCE_LIMIT = 1e3


def in_goal(s):
    s = np.asarray(s, float)
    x, y = s[..., 0], s[..., 1]
    return (x >= 0.95) & (x <= 1.0) & (y >= -1.0) & (y <= -0.95)


def features(s):
    """phi(s) = [x^2, y^2, x, y, exp(-8 |s|^2), goal indicator, 1]."""
    s = np.asarray(s, float)
    x, y = s[..., 0], s[..., 1]
    return np.stack(
        [x * x, y * y, x, y, np.exp(-8 * (x * x + y * y)), in_goal(s).astype(float), np.ones_like(x)],
        axis=-1,
    )


def true_reward(s):
    s = np.asarray(s, float)
    x, y = s[..., 0], s[..., 1]
    return -((x - 1) ** 2) - (y + 1) ** 2 - 80 * np.exp(-8 * (x * x + y * y)) + 10 * in_goal(s)


def clip_action(a):
    return np.clip(a, ACTION_LOW, ACTION_HIGH)


def _transition(s, a, drift_mask):
    """Batched dynamics given which rows take the drift branch."""
    moved = s + a / 10
    norm = np.linalg.norm(s, axis=-1, keepdims=True)
    pull = np.divide(s, 10 * norm, out=np.zeros_like(s), where=norm > 0)
    nxt = np.where(drift_mask[..., None], s - pull, moved)
    nxt[..., 0] = np.clip(nxt[..., 0], *X_BOUNDS)
    nxt[..., 1] = np.clip(nxt[..., 1], *Y_BOUNDS)
    return nxt


def gaussian_grid_step(s, a, eps, rng):
    """One step from a single state. Returns (next_state, reward, done)."""
    if not 0 <= eps <= 1:
        raise DomainError(f"eps must be in [0, 1], got {eps}")
    s = np.asarray(s, float)[None]
    a = clip_action(np.asarray(a, float))[None]
    drift = np.array([rng.random() < eps])
    nxt = _transition(s, a, drift)[0]
    return nxt, float(true_reward(nxt)), bool(in_goal(nxt))


@dataclass
class LinearGaussianPolicy:
    """Action mean W @ phi(s), diagonal covariance exp(2 log_std)."""

    weights: np.ndarray = field(default_factory=lambda: np.zeros((2, N_FEATURES)))
    log_std: np.ndarray = field(default_factory=lambda: np.full(2, np.log(0.3)))

    def __post_init__(self):
        self.weights = np.array(self.weights, dtype=float)
        self.log_std = np.array(self.log_std, dtype=float)
        if self.weights.shape != (2, N_FEATURES) or self.log_std.shape != (2,):
            raise ShapeError("weights must be (2, 7) and log_std (2,)")

    def copy(self):
        return LinearGaussianPolicy(self.weights.copy(), self.log_std.copy())

    def mean(self, phi):
        return phi @ self.weights.T

    def sample(self, phi, rng):
        return self.mean(phi) + np.exp(self.log_std) * rng.standard_normal(phi.shape[:-1] + (2,))

    def log_prob(self, phi, a):
        z = (a - self.mean(phi)) * np.exp(-self.log_std)
        return (-0.5 * z * z - self.log_std - 0.5 * np.log(2 * np.pi)).sum(axis=-1)

    def grad_log_prob(self, phi, a):
        """Per-sample gradients: (..., 2, 7) for weights and (..., 2) for log_std."""
        var = np.exp(2 * self.log_std)
        diff = a - self.mean(phi)
        g_w = (diff / var)[..., :, None] * phi[..., None, :]
        g_s = diff * diff / var - 1
        return g_w, g_s

    @property
    def params(self):
        return np.concatenate([self.weights.ravel(), self.log_std])

    def set_params(self, p):
        self.weights = p[: 2 * N_FEATURES].reshape(2, N_FEATURES).copy()
        self.log_std = p[2 * N_FEATURES :].copy()


@dataclass
class Trajectory:
    states: np.ndarray
    player_actions: np.ndarray
    opponent_actions: np.ndarray
    rewards: np.ndarray
    feature_means: np.ndarray


@dataclass
class Rollouts:
    """A batch of n equal-horizon rollouts; steps after termination are masked."""

    states: np.ndarray  # (H + 1, n, 2)
    player_actions: np.ndarray  # (H, n, 2) raw samples
    opponent_actions: np.ndarray  # (H, n, 2)
    player_control: np.ndarray  # (H, n) bool
    alive: np.ndarray  # (H, n) bool, step t was taken
    rewards: np.ndarray  # (H, n), reward of the state reached at t + 1
    true_rewards: np.ndarray  # (H, n)

    @property
    def n(self):
        return self.states.shape[1]

    def feature_means(self):
        """Mean of phi over the start state and every state reached."""
        phi = features(self.states)  # (H + 1, n, 7)
        visited = np.vstack([np.ones((1, self.n), bool), self.alive])
        w = visited[..., None]
        return (phi * w).sum(axis=0) / visited.sum(axis=0)[:, None]

    def discounted_returns(self, gamma, true=True):
        r = self.true_rewards if true else self.rewards
        disc = gamma ** np.arange(r.shape[0])
        return (disc[:, None] * r).sum(axis=0)

    def trajectory(self, i):
        steps = int(self.alive[:, i].sum())
        return Trajectory(
            self.states[: steps + 1, i],
            self.player_actions[:steps, i],
            self.opponent_actions[:steps, i],
            self.rewards[:steps, i],
            self.feature_means()[i],
        )


@dataclass
class GaussianGrid:
    eps: float = 0.0
    horizon: int = 200
    gamma: float = 0.99

    def __post_init__(self):
        if not 0 <= self.eps <= 1:
            raise DomainError("eps must be in [0, 1]")
        if self.horizon < 1 or not 0 < self.gamma < 1:
            raise DomainError("horizon must be positive and gamma in (0, 1)")

    def rollout(self, n, rng, player=None, opponent=None, alpha=1.0, theta=None):
        """Roll out n episodes. Without a player, actions are uniform on the box.

        Each step both policies sample an action and the player's is executed
        with probability alpha.
        """
        h = self.horizon
        s = np.tile(START, (n, 1))
        states = np.empty((h + 1, n, 2))
        states[0] = s
        a_pl = np.zeros((h, n, 2))
        a_op = np.zeros((h, n, 2))
        ctrl = np.ones((h, n), bool)
        alive = np.zeros((h, n), bool)
        rew = np.zeros((h, n))
        true_r = np.zeros((h, n))
        done = np.zeros(n, bool)
        for t in range(h):
            phi = features(s)
            if player is None:
                a_pl[t] = rng.uniform(ACTION_LOW, ACTION_HIGH, (n, 2))
            else:
                a_pl[t] = player.sample(phi, rng)
            if opponent is not None:
                a_op[t] = opponent.sample(phi, rng)
                ctrl[t] = rng.random(n) < alpha
            exe = clip_action(np.where(ctrl[t][:, None], a_pl[t], a_op[t]))
            drift = rng.random(n) < self.eps
            nxt = _transition(s, exe, drift)
            alive[t] = ~done
            nxt = np.where(done[:, None], s, nxt)
            tr = true_reward(nxt)
            true_r[t] = np.where(done, 0.0, tr)
            if theta is not None:
                rew[t] = np.where(done, 0.0, features(nxt) @ theta)
            else:
                rew[t] = true_r[t]
            done = done | in_goal(nxt)
            s = nxt
            states[t + 1] = s
        return Rollouts(states, a_pl, a_op, ctrl, alive, rew, true_r)


def returns_to_go(rewards, alive, gamma):
    """G_t = sum_{k >= t} gamma^(k - t) r_k with r_k the reward on reaching s_{k+1}."""
    g = np.zeros_like(rewards)
    acc = np.zeros(rewards.shape[1])
    for t in range(rewards.shape[0] - 1, -1, -1):
        acc = (rewards[t] + gamma * acc) * alive[t]
        g[t] = acc
    return g


def softmax_weights(logits):
    z = np.asarray(logits, float)
    z = z - z.max()
    w = np.exp(z)
    return w / w.sum()


class _Adam:
    def __init__(self, n, lr, b1=0.9, b2=0.999, eps=1e-8):
        self.m = np.zeros(n)
        self.v = np.zeros(n)
        self.t = 0
        self.lr, self.b1, self.b2, self.eps = lr, b1, b2, eps

    def ascent(self, p, g):
        self.t += 1
        self.m = self.b1 * self.m + (1 - self.b1) * g
        self.v = self.b2 * self.v + (1 - self.b2) * g * g
        m_hat = self.m / (1 - self.b1**self.t)
        v_hat = self.v / (1 - self.b2**self.t)
        return p + self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def reinforce_gradient(policy, rollouts, who, gamma, baseline=True, theta_rewards=True, normalize=False):
    """Flattened REINFORCE gradient of the discounted return for the player or
    the opponent, counting only log-prob terms of the steps it controlled.

    `normalize` divides baselined returns-to-go by their pooled SD."""
    if who == "player":
        mask, acts = rollouts.player_control, rollouts.player_actions
    elif who == "opponent":
        mask, acts = ~rollouts.player_control, rollouts.opponent_actions
    else:
        raise ValueError(f"who must be 'player' or 'opponent', got {who!r}")
    r = rollouts.rewards if theta_rewards else rollouts.true_rewards
    g = returns_to_go(r, rollouts.alive, gamma)
    if baseline:
        counts = np.maximum(rollouts.alive.sum(axis=1, keepdims=True), 1)
        b = (g * rollouts.alive).sum(axis=1, keepdims=True) / counts
        g = (g - b) * rollouts.alive
    if normalize:
        sd = g[rollouts.alive].std() if rollouts.alive.any() else 0.0
        g = g / sd if sd > 0 else g
    h = r.shape[0]
    weight = (gamma ** np.arange(h))[:, None] * g * (mask & rollouts.alive)
    phi = features(rollouts.states[:-1])
    g_w, g_s = policy.grad_log_prob(phi, acts)
    n = rollouts.n
    grad_w = (weight[..., None, None] * g_w).sum(axis=(0, 1)) / n
    grad_s = (weight[..., None] * g_s).sum(axis=(0, 1)) / n
    return np.concatenate([grad_w.ravel(), grad_s])


def _guard(*policies):
    for p in policies:
        if p is not None and np.abs(p.weights).mean() > DIVERGENCE_LIMIT:
            raise ConvergenceError("policy weights diverged", float(np.abs(p.weights).mean()), 0)


@dataclass
class PgConfig:
    n_outer: int = 50
    n_traj: int = 20
    lr: float = 0.01
    baseline: bool = True
    min_log_std: float = np.log(0.02)
    normalize: bool = True


def two_player_policy_gradient(env, reward_theta, alpha, cfg: PgConfig, rng, player=None, opponent=None):
    """Alternating REINFORCE: the player ascends and the opponent descends the
    discounted return under reward <theta, phi>. Returns (player, opponent)."""
    if not 0 <= alpha <= 1:
        raise DomainError("alpha must be in [0, 1]")
    player = LinearGaussianPolicy() if player is None else player.copy()
    opponent = LinearGaussianPolicy() if opponent is None else opponent.copy()
    theta = np.asarray(reward_theta, float)
    opt_pl = _Adam(player.params.size, cfg.lr)
    opt_op = _Adam(opponent.params.size, cfg.lr)
    for _ in range(cfg.n_outer):
        ro = env.rollout(cfg.n_traj, rng, player, opponent, alpha, theta)
        g_pl = reinforce_gradient(player, ro, "player", env.gamma, cfg.baseline, normalize=cfg.normalize)
        player.set_params(opt_pl.ascent(player.params, g_pl))
        if alpha < 1:
            g_op = reinforce_gradient(opponent, ro, "opponent", env.gamma, cfg.baseline, normalize=cfg.normalize)
            opponent.set_params(opt_op.ascent(opponent.params, -g_op))
        for p in (player, opponent):
            np.maximum(p.log_std, cfg.min_log_std, out=p.log_std)
        _guard(player, opponent)
    return player, opponent


def train_expert(env, cfg: PgConfig, rng, theta=TRUE_THETA):
    """Single-agent policy gradient on the given reward."""
    pl, _ = two_player_policy_gradient(env, theta, 1.0, cfg, rng)
    return pl


@dataclass
class ReIrlConfig:
    n_iters: int = 10
    n_theta: int = 20
    dataset_size: int = 100
    lr_theta: float = 0.05
    pg: PgConfig = field(default_factory=PgConfig)


@dataclass
class ReIrlResult:
    theta: np.ndarray
    player: LinearGaussianPolicy
    opponent: LinearGaussianPolicy
    grad_norms: list


def re_irl_gradient(expert_feature_mean, traj_features, theta):
    w = softmax_weights(traj_features @ theta)
    return expert_feature_mean - w @ traj_features, w


def relative_entropy_irl(env, expert_feature_mean, alpha, cfg: ReIrlConfig, rng):
    """Relative-entropy IRL with a player/opponent sampling mixture; alpha = 1
    gives the standard algorithm."""
    if not 0 < alpha <= 1:
        raise DomainError("alpha must be in (0, 1]")
    theta = np.zeros(N_FEATURES)
    opt = _Adam(N_FEATURES, cfg.lr_theta)
    player = opponent = None
    norms = []
    for it in range(cfg.n_iters):
        if player is None:
            data = env.rollout(cfg.dataset_size, rng)
        else:
            data = env.rollout(cfg.dataset_size, rng, player, opponent, alpha)
        phis = data.feature_means()
        if np.ptp(phis, axis=0).max() == 0:
            warnings.warn("all trajectories share the same feature mean", RuntimeWarning)
        for _ in range(cfg.n_theta):
            g, _ = re_irl_gradient(expert_feature_mean, phis, theta)
            theta = opt.ascent(theta, g)
        norms.append(float(np.linalg.norm(g)))
        player, opponent = two_player_policy_gradient(env, theta, alpha, cfg.pg, rng, player, opponent)
    return ReIrlResult(theta, player, opponent, norms)


def evaluate_continuous(env, policy, n, rng):
    """Mean and SD of the discounted true return of a policy acting alone."""
    ro = env.rollout(n, rng, policy)
    ret = ro.discounted_returns(env.gamma)
    return float(ret.mean()), float(ret.std(ddof=1))


@dataclass
class ContinuousExperiment:
    eps_e: float = 0.2
    eps_l: float = 0.0
    alphas: tuple = (0.85, 1.0)
    seeds: tuple = (0, 1, 2, 3, 4)
    horizon: int = 200
    n_demos: int = 50
    n_eval: int = 200
    expert_pg: PgConfig = field(default_factory=lambda: PgConfig(n_outer=300, n_traj=20, lr=0.01))
    irl: ReIrlConfig = field(default_factory=ReIrlConfig)
    # extra alpha = 1 run of the robust variant on its own RNG stream, to gauge seed noise
    robust_alpha_one: bool = False


def run_continuous(cfg: ContinuousExperiment, expert_cache=None):
    """Rows of (seed, method, eps_e, eps_l, alpha, mean_return, sd_return)."""
    rows = []
    for seed in cfg.seeds:
        expert_env = GaussianGrid(cfg.eps_e, cfg.horizon)
        learner_env = GaussianGrid(cfg.eps_l, cfg.horizon)
        key = (seed, cfg.eps_e, cfg.horizon)
        if expert_cache is not None and key in expert_cache:
            phi_e = expert_cache[key]
        else:
            expert = train_expert(expert_env, cfg.expert_pg, np.random.default_rng([seed, 0]))
            demos = expert_env.rollout(cfg.n_demos, np.random.default_rng([seed, 1]), expert)
            phi_e = demos.feature_means().mean(axis=0)
            if expert_cache is not None:
                expert_cache[key] = phi_e
        runs = [("re-irl" if a == 1 else "robust-re-irl", a, 2) for a in cfg.alphas]
        if cfg.robust_alpha_one:
            runs.append(("robust-re-irl", 1.0, 4))
        for method, alpha, stream in runs:
            res = relative_entropy_irl(learner_env, phi_e, alpha, cfg.irl, np.random.default_rng([seed, stream]))
            mean, sd = evaluate_continuous(learner_env, res.player, cfg.n_eval, np.random.default_rng([seed, 3]))
            rows.append(dict(seed=seed, method=method, eps_e=cfg.eps_e, eps_l=cfg.eps_l,
                             alpha=alpha, mean_return=mean, sd_return=sd))
    return rows
