"""Benchmark MDPs: grid worlds, ObjectWorld, the low-dimensional grid and the
three-state example used for closed-form checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .mdp import ConfigurationError, DomainError, RewardModel, ShapeError, TabularMdp, mix_dynamics

UP, DOWN, LEFT, RIGHT = range(4)
MOVES = {UP: (-1, 0), DOWN: (1, 0), LEFT: (0, -1), RIGHT: (0, 1)}


@dataclass
class GridSpec:
    n: int
    reward_map: np.ndarray  # (n, n) or flat n*n
    terminal_cells: frozenset = frozenset()
    feature_mode: str = "one-hot"
    features: Optional[np.ndarray] = None  # required when feature_mode == "custom"
    gamma: float = 0.99

    def __post_init__(self):
        self.reward_map = np.asarray(self.reward_map, dtype=float).reshape(-1)
        if self.reward_map.size != self.n * self.n:
            raise ShapeError(f"reward_map needs {self.n * self.n} entries, got {self.reward_map.size}")
        self.terminal_cells = frozenset(int(c) for c in self.terminal_cells)
        if self.feature_mode not in ("one-hot", "custom"):
            raise ConfigurationError(f"unknown feature_mode {self.feature_mode!r}")


def cell(n, r, c):
    return r * n + c


def grid_transitions(n, terminal_cells=()):
    """Deterministic grid moves; off-grid moves and terminal cells self-loop."""
    s = n * n
    t = np.zeros((s, 4, s))
    for r in range(n):
        for c in range(n):
            i = cell(n, r, c)
            for a, (dr, dc) in MOVES.items():
                rr, cc = r + dr, c + dc
                j = cell(n, rr, cc) if 0 <= rr < n and 0 <= cc < n else i
                t[i, a, j] = 1.0
    for i in terminal_cells:
        t[i] = 0.0
        t[i, :, i] = 1.0
    return t


def make_gridworld(spec: GridSpec):
    t = grid_transitions(spec.n, spec.terminal_cells)
    s = spec.n * spec.n
    if spec.feature_mode == "one-hot":
        reward = RewardModel.one_hot(spec.reward_map)
    else:
        phi = np.asarray(spec.features, dtype=float)
        if phi.shape[0] != s:
            raise ShapeError("custom features need one row per cell")
        theta, *_ = np.linalg.lstsq(phi, spec.reward_map, rcond=None)
        reward = RewardModel(phi, theta)
    return TabularMdp(t, spec.gamma, np.full(s, 1.0 / s), reward)


def make_noisy(mdp, eps):
    """Mix the dynamics with the uniform kernel: (1 - eps) T + eps / |S|."""
    if not 0 <= eps <= 1:
        raise DomainError(f"eps must be in [0, 1], got {eps}")
    t_bar = np.full_like(mdp.transitions, 1.0 / mdp.n_states)
    return mdp.with_transitions(mix_dynamics(mdp.transitions, t_bar, eps))


def grid_d_dyn(n_states, eps_a, eps_b):
    return 2 * (1 - 1 / n_states) * abs(eps_a - eps_b)


# ---------------------------------------------------------------------------
# grid presets (layouts are illustrative, not numerically canonical)


def _grid_layout(name, n):
    r = np.zeros((n, n))
    k = n - 1
    if name == "grid-1":
        # a single rewarding corner, mild step cost, one penalty strip
        r[:] = -0.1
        r[k, k] = 1.0
        r[1:k, n // 2] = -1.0
    elif name == "grid-2":
        # goal behind a wall with a single gap near the top
        r[:] = 0.0
        r[1:, n // 2] = -1.0
        r[0, k] = 1.0
    elif name == "grid-3":
        # two goals of different value separated by a penalty band
        r[:] = -0.1
        r[k, k] = 1.0
        r[0, 0] = 0.5
        for i in range(n):
            if 0 < i < k:
                r[i, k - i] = -1.0
    elif name == "grid-4":
        # corridor along the border, penalised interior
        r[:] = -1.0
        r[0, :] = -0.1
        r[:, k] = -0.1
        r[k, k] = 1.0
    else:
        raise ConfigurationError(f"unknown grid preset {name!r}")
    return r


def grid_preset(name, n=5, gamma=0.99):
    return make_gridworld(GridSpec(n, _grid_layout(name, n), gamma=gamma))


# ---------------------------------------------------------------------------
# ObjectWorld

COLORS = ("blue", "green")


@dataclass
class ObjectWorldSpec:
    n: int = 10
    n_objects: int = 15
    seed: int = 0
    gamma: float = 0.7
    feature_mode: str = "one-hot"

    def __post_init__(self):
        if self.n_objects > self.n * self.n:
            raise ConfigurationError("more objects than cells")


@dataclass(frozen=True)
class WorldObject:
    row: int
    col: int
    outer: str
    inner: str


def place_objects(spec: ObjectWorldSpec):
    rng = np.random.default_rng(spec.seed)
    cells = rng.choice(spec.n * spec.n, size=spec.n_objects, replace=False)
    outer = rng.integers(0, len(COLORS), size=spec.n_objects)
    inner = rng.integers(0, len(COLORS), size=spec.n_objects)
    return [
        WorldObject(int(c) // spec.n, int(c) % spec.n, COLORS[o], COLORS[i])
        for c, o, i in zip(cells, outer, inner)
    ]


def _chebyshev(n, objects, which, color):
    """Distance grid from every cell to the nearest object of the given color."""
    d = np.full((n, n), np.inf)
    rows, cols = np.indices((n, n))
    for ob in objects:
        if getattr(ob, which) == color:
            d = np.minimum(d, np.maximum(abs(rows - ob.row), abs(cols - ob.col)))
    return d


def objectworld_rewards(n, objects):
    blue = _chebyshev(n, objects, "outer", "blue") <= 3
    green = _chebyshev(n, objects, "outer", "green") <= 2
    r = np.full((n, n), -1.0)
    r[blue] = -2.0
    r[blue & green] = 0.0
    return r


def objectworld_distance_features(n, objects):
    """Indicators 'nearest object of this outer/inner color within k' for k = 1..n."""
    cols = []
    for which in ("outer", "inner"):
        for color in COLORS:
            d = _chebyshev(n, objects, which, color).reshape(-1)
            cols.extend((d <= k).astype(float) for k in range(1, n + 1))
    return np.stack(cols, axis=1)


def make_objectworld(spec: ObjectWorldSpec):
    objects = place_objects(spec)
    rmap = objectworld_rewards(spec.n, objects).reshape(-1)
    white = np.flatnonzero(rmap == 0.0)
    if white.size == 0:
        raise ConfigurationError("ObjectWorld layout has no zero-reward cell for the goal")
    rng = np.random.default_rng([spec.seed, 1])
    goal = int(rng.choice(white))
    s = spec.n * spec.n
    t = grid_transitions(spec.n, terminal_cells=(goal,))
    goal_col = np.zeros((s, 1))
    goal_col[goal] = 1.0
    if spec.feature_mode == "one-hot":
        phi = np.hstack([np.eye(s), goal_col])
        theta = np.append(rmap, 0.0)
    elif spec.feature_mode == "custom":
        phi = np.hstack([objectworld_distance_features(spec.n, objects), goal_col])
        theta, *_ = np.linalg.lstsq(phi, rmap, rcond=None)
    else:
        raise ConfigurationError(f"unknown feature_mode {spec.feature_mode!r}")
    return TabularMdp(t, spec.gamma, np.full(s, 1.0 / s), RewardModel(phi, theta))


# ---------------------------------------------------------------------------
# low-dimensional grid

LOW_DIM_WEIGHTS = np.array([-2.0, -6.0, -1.0])


@dataclass
class LowDimGridSpec:
    n: int
    danger: np.ndarray  # per cell: 0 none, 1 type-1, 2 type-2
    terminal_cells: frozenset = field(default_factory=frozenset)
    gamma: float = 0.99

    def __post_init__(self):
        self.danger = np.asarray(self.danger, dtype=int).reshape(-1)
        if self.danger.size != self.n * self.n:
            raise ShapeError("danger map needs one entry per cell")
        self.terminal_cells = frozenset(int(c) for c in self.terminal_cells)


def low_dim_features(spec: LowDimGridSpec):
    phi = np.zeros((spec.n * spec.n, 3))
    phi[:, 0] = spec.danger == 1
    phi[:, 1] = spec.danger == 2
    phi[:, 2] = 1.0
    for c in spec.terminal_cells:
        phi[c, 2] = 0.0
    return phi


def make_gridworld_l(spec: LowDimGridSpec, weights=LOW_DIM_WEIGHTS):
    s = spec.n * spec.n
    t = grid_transitions(spec.n, spec.terminal_cells)
    reward = RewardModel(low_dim_features(spec), weights)
    return TabularMdp(t, spec.gamma, np.full(s, 1.0 / s), reward)


def gridworld_l_preset(n=5, gamma=0.99):
    danger = np.zeros((n, n), dtype=int)
    k = n - 1
    danger[1:k, 1] = 1
    danger[1:k, k - 1] = 2
    danger[k // 2, 1:k] = np.where(danger[k // 2, 1:k] == 0, 1, danger[k // 2, 1:k])
    return make_gridworld_l(LowDimGridSpec(n, danger, frozenset({cell(n, k, k)}), gamma))


# ---------------------------------------------------------------------------
# three-state example

CONSTRUCTIVE_REWARD = np.array([0.0, 1.0, -1.0])


def make_constructive(eps, gamma=0.99):
    """s0 chooses between a1 (reaches s1 w.p. 1 - eps, else s2) and a2 (reaches s2);
    s1 and s2 are absorbing."""
    if not 0 <= eps <= 1:
        raise DomainError(f"eps must be in [0, 1], got {eps}")
    t = np.zeros((3, 2, 3))
    t[0, 0, 1] = 1 - eps
    t[0, 0, 2] = eps
    t[0, 1, 2] = 1.0
    t[1, :, 1] = 1.0
    t[2, :, 2] = 1.0
    return TabularMdp(t, gamma, np.array([1.0, 0.0, 0.0]), RewardModel.one_hot(CONSTRUCTIVE_REWARD))


PRESETS = ("grid-1", "grid-2", "grid-3", "grid-4", "objectworld-10", "gridworld-l", "constructive")


def make_preset(name, n=None, eps=0.0, seed=0):
    """Build a named environment; `eps` adds uniform transition noise
    (for the three-state example it is the slip probability instead)."""
    if name.startswith("grid-"):
        base = grid_preset(name, n or 5)
    elif name == "objectworld-10":
        base = make_objectworld(ObjectWorldSpec(n=n or 10, seed=seed))
    elif name == "gridworld-l":
        base = gridworld_l_preset(n or 5)
    elif name == "constructive":
        return make_constructive(eps)
    else:
        raise ConfigurationError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return make_noisy(base, eps) if eps else base
