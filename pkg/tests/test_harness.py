import dataclasses
import json

import numpy as np
import pytest

from barfi.config import make_config
from barfi.envs import GridWorld, MountainCar
from barfi.errors import ConfigError
from barfi.harness import (
    METRICS_HEADER,
    Episode,
    emit_metrics,
    evaluate,
    read_metrics,
    rollout,
    run,
    run_barfi,
    run_baseline,
    shaped_rewards,
    sweep,
    write_outputs,
)
from barfi.inner import Trajectory


class FixedPolicy:
    """Deterministic policy over raw observations for evaluation checks."""

    def __init__(self, choose, num_actions):
        self.choose = choose
        self.num_actions = num_actions

    def log_probs(self, x):
        with np.errstate(divide="ignore"):
            return np.log(np.eye(self.num_actions)[self.choose(x)])


def identity(raw):
    return np.asarray(raw, dtype=float)


def test_evaluate_goal_reaching_gridworld(rng):
    pol = FixedPolicy(lambda s: 3 if s[0] < 4 else 0, 4)
    assert evaluate(pol, GridWorld(), identity, 3, rng) == 100.0


def test_evaluate_failing_mountaincar(rng):
    pol = FixedPolicy(lambda s: 1, 3)
    assert evaluate(pol, MountainCar(), identity, 2, rng) == 0.0


def test_evaluate_single_episode_is_its_return():
    pol = FixedPolicy(lambda s: 3 if s[0] < 4 else 0, 4)
    ep = rollout(GridWorld(), pol, identity, np.random.default_rng(0))
    assert evaluate(pol, GridWorld(), identity, 1, np.random.default_rng(0)) == ep.trajectory.r_p.sum()
    assert len(ep.raw_states) == len(ep.trajectory) + 1


def small_gw(method="barfi", **kw):
    base = dict(total_episodes=80, N0=50, Ni=3, seed=1, record_wallclock=False, horizon=30)
    base.update(kw)
    return make_config("gridworld", "GW_centerBonus", method, **base)


def test_barfi_episode_accounting_and_warmup():
    res = run_barfi(small_gw())
    assert len(res.rows) == 80
    assert [r.episode for r in res.rows] == list(range(80))
    assert res.outer_updates[0] >= 50
    assert len(res.outer_updates) + res.skipped_outer == 10
    assert res.rows[0].gamma_value == pytest.approx(0.99, abs=1e-3)


def test_barfi_partial_last_iteration():
    res = run_barfi(small_gw(total_episodes=55, delta=3))
    assert len(res.rows) == 55
    assert len(res.outer_updates) + res.skipped_outer == 2


def test_metrics_are_byte_identical_for_same_seed(tmp_path):
    a = write_outputs(run(small_gw()), tmp_path / "a")
    b = write_outputs(run(small_gw()), tmp_path / "b")
    assert (a / "metrics.csv").read_bytes() == (b / "metrics.csv").read_bytes()
    c = write_outputs(run(small_gw(seed=2)), tmp_path / "c")
    assert (a / "metrics.csv").read_bytes() != (c / "metrics.csv").read_bytes()


def test_metrics_csv_and_manifest(tmp_path):
    res = run(small_gw())
    out = write_outputs(res, tmp_path)
    lines = (out / "metrics.csv").read_text().splitlines()
    assert lines[0] == "episode,return_primary,return_aux,gamma_value,phi_l2norm,wallclock_ms"
    assert len(lines) == 81
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 1 and manifest["config"]["method"] == "barfi"
    assert len(manifest["build_id"]) == 40
    assert manifest["first_outer_update_episode"] >= 50
    assert read_metrics(out / "metrics.csv")[0].keys() == set(METRICS_HEADER)


def test_frozen_outer_step_sizes_are_a_no_op():
    cfg = make_config("bandit", "Bandit_none", "barfi", total_episodes=40, seed=3, record_wallclock=False)
    frozen = dataclasses.replace(cfg, alpha_phi=0.0, alpha_varphi=0.0)
    a = run_barfi(frozen)
    b = run_barfi(cfg, outer_updates=False)
    assert a.rows == b.rows
    np.testing.assert_array_equal(a.policy.theta, b.policy.theta)


def test_naive_without_aux_matches_reinforce():
    kw = dict(total_episodes=50, seed=4, record_wallclock=False)
    a = run_baseline(make_config("bandit", "Bandit_none", "naive", **kw))
    b = run_baseline(make_config("bandit", "Bandit_none", "reinforce_rp", **kw))
    assert a.rows == b.rows
    np.testing.assert_array_equal(a.policy.theta, b.policy.theta)


def test_bandit_reinforce_learns_best_arm():
    res = run_baseline(make_config("bandit", "Bandit_none", "reinforce_rp", total_episodes=400, alpha_theta=0.05,
                                   lambda_theta=0.0))
    assert np.argmax(res.policy.theta) == 2


def test_potential_action_shaping_penalizes_matched_pairs():
    cfg = make_config("cartpole", "CP_matchPD", "potential_action", outer_gamma=0.9)
    traj = Trajectory(np.zeros((2, 1)), [1, 1], [1.0, 1.0], [5.0, 5.0], [0.0, 0.0])
    r = shaped_rewards(cfg, None, Episode(traj, [None] * 3))
    assert r[0] - traj.r_p[0] == pytest.approx(0.9 * 5 - 5)
    assert r[0] - traj.r_p[0] < 0
    assert r[1] == pytest.approx(1.0 - 5.0)


def test_potential_state_uses_state_potential():
    cfg = make_config("gridworld", "GW_centerBonus", "potential_state", outer_gamma=0.5)
    raws = [np.array([1.0, 2.0]), np.array([2.0, 2.0]), np.array([2.0, 3.0])]
    traj = Trajectory(np.zeros((2, 1)), [3, 0], [0.0, 0.0], [50.0, 0.0], [0.0, 0.0])
    r = shaped_rewards(cfg, GridWorld(), Episode(traj, raws))
    np.testing.assert_allclose(r, [0.5 * 50.0, -50.0])


def test_potential_state_rejects_action_dependent_aux():
    with pytest.raises(ConfigError):
        run_baseline(make_config("mountaincar", "MC_energyPump", "potential_state", total_episodes=1))


def test_actor_critic_runs():
    res = run_baseline(make_config("gridworld", "GW_negL2", "actor_critic", total_episodes=5, horizon=20))
    assert len(res.rows) == 5


def test_run_dispatch_errors():
    with pytest.raises(ConfigError):
        run_barfi(make_config("bandit", "Bandit_none", "naive"))
    with pytest.raises(ConfigError):
        run_baseline(make_config("bandit", "Bandit_none", "barfi"))


def test_sweep_writes_one_directory_per_seed(tmp_path):
    cfg = make_config("bandit", "Bandit_none", "barfi", total_episodes=20, record_wallclock=False)
    done = sweep(cfg, [0, 1], str(tmp_path), workers=2)
    assert sorted(s for s, _ in done) == [0, 1]
    a = (tmp_path / "seed_0" / "metrics.csv").read_bytes()
    assert a != (tmp_path / "seed_1" / "metrics.csv").read_bytes()
    assert a == write_outputs(run(cfg.replace(seed=0)), tmp_path / "again").joinpath("metrics.csv").read_bytes()


def test_emit_metrics_empty(tmp_path):
    emit_metrics([], tmp_path / "m.csv")
    assert (tmp_path / "m.csv").read_text().strip() == ",".join(METRICS_HEADER)
