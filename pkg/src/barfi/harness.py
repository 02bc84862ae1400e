"""Training loops, baselines, metrics output and multi-seed sweeps."""
import csv
import hashlib
import json
import logging
import os
import time
from dataclasses import astuple, dataclass, field, fields
from multiprocessing import Pool
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .envs import STATE_ONLY_AUX, Aux, make_env
from .errors import ConfigError, NeumannDivergenceError
from .features import FourierBasis, TileCoder, onehot
from .implicit import NeumannConfig, outer_gradients
from .inner import InnerRegularizer, ReplayBuffer, Trajectory, discounted_returns, inner_converge
from .optim import make_optimizer
from .policy import SoftmaxLinearPolicy
from .reward import AlignmentReward, LearnedDiscount

log = logging.getLogger(__name__)


class Featurizer:
    """Maps raw observations to feature vectors; ``unit`` satisfies ``unit . x == 1``."""

    def __init__(self, fn, num_features, unit):
        self.fn = fn
        self.num_features = num_features
        self.unit = unit

    def __call__(self, raw):
        return self.fn(raw)


def make_featurizer(env):
    if env.name in ("gridworld", "cartpole"):
        basis = FourierBasis(3, env.obs_bounds)
        return Featurizer(basis, basis.num_features, onehot(basis.num_features, 0))
    if env.name == "mountaincar":
        coder = TileCoder(5, 4, env.obs_bounds)
        return Featurizer(coder, coder.num_features, np.full(coder.num_features, 1.0 / coder.tilings))
    return Featurizer(lambda raw: np.ones(1), 1, np.ones(1))


@dataclass
class Episode:
    trajectory: Trajectory
    raw_states: list  # S_0 .. S_T, the last one is where the episode ended


def rollout(env, policy, featurize, rng, env_rng=None):
    """One episode; ``env_rng`` (default ``rng``) drives the start state."""
    state = env.reset(rng if env_rng is None else env_rng)
    raws, xs, acts, rps, rauxs, logps = [state.raw], [], [], [], [], []
    while not state.terminal:
        x = featurize(state.raw)
        logp = policy.log_probs(x)
        a = int(min(np.searchsorted(np.cumsum(np.exp(logp)), rng.random(), side="right"), len(logp) - 1))
        out = env.step(state, a)
        xs.append(x)
        acts.append(a)
        rps.append(out.r_p)
        rauxs.append(out.r_aux)
        logps.append(logp[a])
        state = out.next_state
        raws.append(state.raw)
    return Episode(Trajectory(np.array(xs), acts, rps, rauxs, logps, True), raws)


def evaluate(policy, env, featurize, episodes, rng):
    """Mean undiscounted primary return under stochastic action sampling."""
    if episodes < 1:
        raise ValueError("episodes must be at least 1")
    return float(np.mean([rollout(env, policy, featurize, rng).trajectory.r_p.sum() for _ in range(episodes)]))


@dataclass
class MetricsRow:
    episode: int
    return_primary: float
    return_aux: float
    gamma_value: float
    phi_l2norm: float
    wallclock_ms: int


METRICS_HEADER = [f.name for f in fields(MetricsRow)]


@dataclass
class RunResult:
    config: ExperimentConfig
    rows: list
    policy: SoftmaxLinearPolicy
    reward_model: AlignmentReward = None
    discount: LearnedDiscount = None
    outer_updates: list = field(default_factory=list)  # episode count at each applied outer step
    skipped_outer: int = 0

    def returns(self):
        return np.array([r.return_primary for r in self.rows])

    def final_mean(self, last):
        return float(self.returns()[-last:].mean())


class _Recorder:
    def __init__(self, cfg):
        self.rows = []
        self.start = time.perf_counter()
        self.wallclock = cfg.record_wallclock

    def add(self, traj, gamma, phi_norm):
        ms = int((time.perf_counter() - self.start) * 1000) if self.wallclock else 0
        self.rows.append(MetricsRow(len(self.rows), float(traj.r_p.sum()), float(traj.r_aux.sum()),
                                    float(gamma), float(phi_norm), ms))


def _streams(seed):
    env_seq, act_seq, replay_seq, outer_seq = np.random.SeedSequence(seed).spawn(4)
    return (np.random.default_rng(env_seq), np.random.default_rng(act_seq),
            np.random.default_rng(replay_seq), np.random.default_rng(outer_seq))


def _setup(cfg):
    kwargs = {"horizon": cfg.horizon} if cfg.horizon and cfg.env != "bandit" else {}
    env = make_env(cfg.env, cfg.aux_variant, **kwargs)
    feat = make_featurizer(env)
    policy = SoftmaxLinearPolicy(feat.num_features, env.num_actions)
    return env, feat, policy


def run_barfi(cfg, outer_updates=True):
    """Bi-level training: replayed inner REINFORCE steps, implicit outer steps.

    With ``outer_updates=False`` the reward and discount stay at their
    initial values and no outer gradients are computed.
    """
    if cfg.method != "barfi":
        raise ConfigError("run_barfi needs method = barfi")
    env_rng, act_rng, replay_rng, outer_rng = _streams(cfg.seed)
    env, feat, policy = _setup(cfg)
    d = feat.num_features
    reward = AlignmentReward.pass_through(d, feat.unit, cfg.phi_aux_init)
    disc = LearnedDiscount(cfg.varphi_init)
    opt_theta = make_optimizer(cfg.optimizer, cfg.alpha_theta, policy.size)
    opt_phi = make_optimizer(cfg.optimizer, cfg.alpha_phi, reward.size)
    opt_varphi = make_optimizer(cfg.optimizer, cfg.alpha_varphi, 1)
    mode = InnerRegularizer("l2" if cfg.inner_reg_mode == "L2" else "entropy", cfg.lambda_theta)
    neumann = NeumannConfig(cfg.eta, cfg.n)
    buffer = ReplayBuffer(cfg.buffer_capacity)
    rec = _Recorder(cfg)
    result = RunResult(cfg, rec.rows, policy, reward, disc)

    def collect():
        traj = rollout(env, policy, feat, act_rng, env_rng).trajectory
        rec.add(traj, disc.gamma, np.linalg.norm(reward.phi))
        return traj

    E = cfg.total_episodes
    for _ in range(min(cfg.N0, E)):
        buffer.append(collect())
    inner_converge(policy, buffer, reward, disc, cfg.N0 + cfg.Ni, opt_theta, mode, replay_rng)
    while len(rec.rows) < E:
        d_on = [collect() for _ in range(min(cfg.delta, E - len(rec.rows)))]
        if outer_updates:
            try:
                step = outer_gradients(policy, reward, disc, buffer.subsample(outer_rng, cfg.outer_batch), d_on,
                                       neumann, cfg.lambda_phi, cfg.lambda_gamma, cfg.outer_gamma, mode)
            except NeumannDivergenceError as exc:
                log.warning("skipping outer update at episode %d: %s", len(rec.rows), exc)
                result.skipped_outer += 1
            else:
                reward.phi = opt_phi.step(reward.phi, step.phi)
                disc.varphi = float(opt_varphi.step(np.array([disc.varphi]), np.array([step.varphi]))[0])
                result.outer_updates.append(len(rec.rows))
        buffer.extend(d_on)
        inner_converge(policy, buffer, reward, disc, cfg.Ni, opt_theta, mode, replay_rng)
    return result


def shaped_rewards(cfg, env, episode):
    """Per-step training reward for the on-policy baselines."""
    traj = episode.trajectory
    gamma = cfg.outer_gamma
    if cfg.method == "naive":
        return traj.r_p + traj.r_aux
    if cfg.method == "potential_state":
        pot = np.array([env.potential(raw) for raw in episode.raw_states])
        pot[-1] = 0.0
        return traj.r_p + gamma * pot[1:] - pot[:-1]
    if cfg.method == "potential_action":
        nxt = np.append(traj.r_aux[1:], 0.0)
        return traj.r_p + gamma * nxt - traj.r_aux
    return traj.r_p


def run_baseline(cfg):
    """On-policy REINFORCE (or actor-critic) with one update per episode."""
    if cfg.method == "barfi":
        raise ConfigError("use run_barfi for method = barfi")
    if cfg.method == "potential_state" and Aux(cfg.aux_variant) not in STATE_ONLY_AUX:
        raise ConfigError(f"potential_state needs a state-only auxiliary reward; {cfg.aux_variant} depends on the action")
    env_rng, act_rng, _, _ = _streams(cfg.seed)
    env, feat, policy = _setup(cfg)
    opt = make_optimizer(cfg.optimizer, cfg.alpha_theta, policy.size)
    critic = np.zeros(feat.num_features) if cfg.method == "actor_critic" else None
    rec = _Recorder(cfg)
    gamma = cfg.outer_gamma
    for _ in range(cfg.total_episodes):
        ep = rollout(env, policy, feat, act_rng, env_rng)
        traj = ep.trajectory
        rec.add(traj, gamma, 0.0)
        r = shaped_rewards(cfg, env, ep)
        weights = discounted_returns(r, gamma)
        if critic is not None:
            values = traj.features @ critic
            weights = weights - values
            for t, x in enumerate(traj.features):
                # TD(0) with the critic refreshed after every step
                v_next = traj.features[t + 1] @ critic if t + 1 < len(traj) else 0.0
                critic += cfg.alpha_critic * (r[t] + gamma * v_next - x @ critic) * x
        probs = policy.action_probs(traj.features)
        coef = -probs
        coef[np.arange(len(traj)), traj.actions] += 1.0
        grad = ((coef * weights[:, None]).T @ traj.features).ravel() - cfg.lambda_theta * policy.theta
        policy.theta = opt.step(policy.theta, grad)
    return RunResult(cfg, rec.rows, policy)


def run(cfg):
    return run_barfi(cfg) if cfg.method == "barfi" else run_baseline(cfg)


def emit_metrics(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(METRICS_HEADER)
        for row in rows:
            w.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in astuple(row)])


def read_metrics(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def build_id():
    """Content hash of the package sources, formatted like a git object id."""
    h = hashlib.sha1()
    for p in sorted(Path(__file__).parent.glob("*.py")):
        h.update(p.name.encode())
        h.update(p.read_bytes())
    return h.hexdigest()


def write_outputs(result, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    emit_metrics(result.rows, out / "metrics.csv")
    manifest = {
        "config": result.config.to_dict(),
        "seed": result.config.seed,
        "build_id": build_id(),
        "episodes": len(result.rows),
        "outer_updates": len(result.outer_updates),
        "first_outer_update_episode": result.outer_updates[0] if result.outer_updates else None,
        "skipped_outer_updates": result.skipped_outer,
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    model = {"theta": result.policy.theta}
    if result.reward_model is not None:
        model.update(phi=result.reward_model.phi, varphi=np.array([result.discount.varphi]))
    np.savez(out / "model.npz", **model)
    return out


def _run_seed(args):
    cfg, out_dir = args
    write_outputs(run(cfg), out_dir)
    return cfg.seed, out_dir


def sweep(cfg, seeds, out_dir, workers=None):
    """One independent run per seed, fanned out over worker processes."""
    jobs = [(cfg.replace(seed=s), os.path.join(out_dir, f"seed_{s}")) for s in seeds]
    workers = workers or min(len(jobs), os.cpu_count() or 1)
    if workers <= 1:
        return [_run_seed(j) for j in jobs]
    with Pool(workers) as pool:
        return pool.map(_run_seed, jobs)
