"""JSON (de)serialization of MDPs and solver outputs.

Loading validates probabilities but never renormalizes them.
"""

from __future__ import annotations

import json

import numpy as np

from .mdp import ConfigurationError, RewardModel, TabularMdp


def mdp_to_dict(mdp):
    return {
        "n_states": mdp.n_states,
        "n_actions": mdp.n_actions,
        "gamma": mdp.gamma,
        "p0": mdp.p0.tolist(),
        "transitions": mdp.transitions.tolist(),
        "reward": None
        if mdp.reward is None
        else {"features": mdp.reward.features.tolist(), "theta": mdp.reward.theta.tolist()},
    }


def mdp_from_dict(d):
    missing = {"n_states", "n_actions", "gamma", "p0", "transitions"} - set(d)
    if missing:
        raise ConfigurationError(f"MDP JSON missing keys {sorted(missing)}")
    t = np.asarray(d["transitions"], dtype=float)
    if t.shape[:2] != (d["n_states"], d["n_actions"]):
        raise ConfigurationError(
            f"transitions shape {t.shape} disagrees with n_states={d['n_states']}, n_actions={d['n_actions']}"
        )
    r = d.get("reward")
    reward = None if r is None else RewardModel(r["features"], r["theta"])
    return TabularMdp(t, d["gamma"], d["p0"], reward)


def dump_mdp(mdp, path):
    with open(path, "w") as fh:
        json.dump(mdp_to_dict(mdp), fh)


def load_mdp(path):
    with open(path) as fh:
        return mdp_from_dict(json.load(fh))


def load_vector(path, key=None):
    """Read a JSON list, or the list stored under `key` in a JSON object."""
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        if key is None or key not in data:
            raise ConfigurationError(f"{path}: expected key {key!r}")
        data = data[key]
    return np.asarray(data, dtype=float)


def to_jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, dict):
        return {k: to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    return x
