import json

import numpy as np
import pytest

from robust_irl import cli
from robust_irl import experiment as ex
from robust_irl.envs import make_constructive
from robust_irl.experiment import parse_results
from robust_irl.io import dump_mdp, load_mdp


@pytest.fixture
def files(tmp_path):
    dump_mdp(make_constructive(0.0), tmp_path / "l.json")
    dump_mdp(make_constructive(0.1), tmp_path / "e.json")
    return tmp_path


def run(args, capsys):
    code = cli.main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_env_make_round_trips(tmp_path, capsys):
    out = tmp_path / "g.json"
    code, _, _ = run(["env", "make", "grid-1", "--eps", "0.1", "--out", out], capsys)
    assert code == 0
    m = load_mdp(out)
    assert m.n_states == 25 and np.allclose(m.transitions.sum(axis=2), 1)


def test_env_make_unknown_preset(capsys):
    code, _, err = run(["env", "make", "nowhere"], capsys)
    assert code == 2 and "unknown preset" in err


def test_solve(files, capsys):
    code, out, _ = run(["solve", "--mdp", files / "e.json", "--method", "hard"], capsys)
    assert code == 0
    assert json.loads(out)["v"][0] == pytest.approx(79.2, abs=1e-6)
    code, out, _ = run(["solve", "--mdp", files / "l.json", "--method", "two-player", "--alpha", "0.9"], capsys)
    assert code == 0 and len(json.loads(out)["opponent"]) == 3


def test_feasibility(files, capsys):
    code, out, _ = run(["feasibility", "--learner", files / "l.json", "--expert", files / "e.json"], capsys)
    d = json.loads(out)
    assert code == 0 and d["feasible"] and d["witness_residual"] < 1e-8


def test_irl_streams_diagnostics(files, tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"irl": {"learning_rate": 0.05, "n_steps": 5}}))
    diag = tmp_path / "d.jsonl"
    code, out, _ = run(
        ["--config", cfg, "irl", "--learner", files / "l.json", "--expert", files / "e.json", "--diagnostics", diag],
        capsys,
    )
    assert code == 0
    lines = [json.loads(x) for x in diag.read_text().splitlines()]
    assert [x["step"] for x in lines] == [1, 2, 3, 4, 5]
    assert set(lines[0]) == {"step", "grad_norm", "l1_mismatch"}
    assert len(json.loads(out)["theta"]) == 3


def test_robust_irl_needs_alpha(files, capsys):
    code, _, _ = run(["robust-irl", "--learner", files / "l.json", "--expert", files / "e.json"], capsys)
    assert code == 2


def test_bounds(capsys):
    inp = json.dumps({"gamma": 0.99, "r_min": -1, "r_max": 1, "n_actions": 2, "d_dyn": 0.198})
    code, out, _ = run(["bounds", "thm1", "--inputs", inp], capsys)
    assert code == 0 and json.loads(out)["value"] == pytest.approx(1960.2)
    code, _, _ = run(["bounds", "thm1", "--inputs", '{"gamma": 2, "r_min": 0, "r_max": 1, "n_actions": 2}'], capsys)
    assert code == 2
    code, _, _ = run(["bounds", "thm1", "--inputs", '{"gamma": 0.9, "typo": 1}'], capsys)
    assert code == 2


def _exp_config(tmp_path, **kw):
    d = dict(env_preset="constructive", eps_e_grid=[0.1], eps_l_grid=[0.0], alpha_grid=[0.9],
             irl={"n_steps": 5}, record_timing=False)
    d.update(kw)
    p = tmp_path / "x.json"
    p.write_text(json.dumps(d))
    return p


def test_experiment_csv_and_json(tmp_path, capsys):
    cfg = _exp_config(tmp_path)
    code, out, _ = run(["--config", cfg, "--seed", "4", "experiment"], capsys)
    assert code == 0
    rows = parse_results(out)
    assert len(rows) == 3 and {r.seed for r in rows} == {4}
    dest = tmp_path / "o.json"
    code, _, _ = run(["experiment", "--config", cfg, "--format", "json", "--out", dest], capsys)
    assert code == 0 and len(parse_results(dest.read_text(), "json")) == 3


def test_experiment_config_error(tmp_path, capsys):
    cfg = _exp_config(tmp_path, eps_l_grid=[])
    assert run(["--config", cfg, "experiment"], capsys)[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["--config", bad, "experiment"], capsys)[0] == 2
    assert run(["--config", tmp_path / "missing.json", "experiment"], capsys)[0] == 2


def test_experiment_cell_error_exit_code(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr(ex, "mce_irl", lambda *a, **k: 1 / 0)
    code, out, _ = run(["--config", _exp_config(tmp_path), "experiment"], capsys)
    assert code == 1
    assert any(r.error for r in parse_results(out))


def test_reirl_rejects_unknown_key(tmp_path, capsys):
    p = tmp_path / "r.json"
    p.write_text(json.dumps({"eps_E": 0.2, "bogus": 1}))
    assert run(["--config", p, "reirl"], capsys)[0] == 2


def test_reirl_tiny_run(tmp_path, capsys):
    p = tmp_path / "r.json"
    p.write_text(json.dumps({"eps_E": 0.2, "eps_L": 0.0, "alpha": [0.85, 1.0], "seeds": [0], "N_theta": 2,
                             "N_pi": 2, "n_traj": 4, "horizon": 20, "n_iters": 2, "dataset_size": 5,
                             "n_demos": 3, "n_eval": 4}))
    code, out, _ = run(["--config", p, "reirl"], capsys)
    lines = out.strip().splitlines()
    assert code == 0
    assert lines[0] == "seed,method,eps_E,eps_L,alpha,mean_return,sd_return"
    assert len(lines) == 3


def test_usage_error_is_config_error(capsys):
    assert cli.main(["no-such-command"]) == 2
