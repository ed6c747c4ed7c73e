import numpy as np
import pytest

from robust_irl.mdp import RewardModel, TabularMdp


def random_mdp(rng, n_states=4, n_actions=2, gamma=0.9, reward=True, sparse=False):
    t = rng.random((n_states, n_actions, n_states))
    if sparse:
        t *= rng.random(t.shape) < 0.5
        t[..., 0] += 1e-3
    t /= t.sum(axis=2, keepdims=True)
    p0 = rng.random(n_states)
    p0 /= p0.sum()
    rm = RewardModel.one_hot(rng.uniform(-1, 1, n_states)) if reward else None
    return TabularMdp(t, gamma, p0, rm)


def random_policy(rng, n_states, n_actions):
    p = rng.random((n_states, n_actions))
    return p / p.sum(axis=1, keepdims=True)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
