"""Experiment configuration: flat ``key = value`` files with strict parsing."""
import dataclasses
from dataclasses import dataclass

from .envs import AUX_BY_ENV, ENVIRONMENTS, Aux
from .errors import ConfigError
from .optim import OPTIMIZER_KINDS

METHODS = ("barfi", "naive", "potential_state", "potential_action", "reinforce_rp", "actor_critic")
REQUIRED = ("env", "aux_variant", "method")


@dataclass
class ExperimentConfig:
    env: str
    aux_variant: str
    method: str
    alpha_theta: float = 1e-3
    alpha_phi: float = 5e-3
    alpha_varphi: float = 5e-3
    alpha_critic: float = 1e-2
    lambda_theta: float = 0.25
    lambda_phi: float = 0.0625
    lambda_gamma: float = 4.0
    eta: float = 5e-4
    n: int = 5
    delta: int = 3
    N0: int = 150
    Ni: int = 15
    buffer_capacity: int = 1000
    total_episodes: int = 1000
    optimizer: str = "rmsprop"
    seed: int = 0
    varphi_init: float = 4.6
    phi_aux_init: float = 1.0
    inner_reg_mode: str = "L2"
    outer_gamma: float = 0.99
    outer_batch: int = 0
    horizon: int = 0
    record_wallclock: bool = True

    def validate(self):
        if self.env not in ENVIRONMENTS:
            raise ConfigError(f"env: unknown environment {self.env!r}")
        try:
            aux = Aux(self.aux_variant)
        except ValueError:
            raise ConfigError(f"aux_variant: unknown variant {self.aux_variant!r}") from None
        if aux not in AUX_BY_ENV[self.env]:
            raise ConfigError(f"aux_variant: {self.aux_variant} does not belong to {self.env}")
        if self.method not in METHODS:
            raise ConfigError(f"method: must be one of {', '.join(METHODS)}")
        if self.optimizer not in OPTIMIZER_KINDS:
            raise ConfigError(f"optimizer: must be one of {', '.join(OPTIMIZER_KINDS)}")
        if self.inner_reg_mode not in ("L2", "Entropy"):
            raise ConfigError("inner_reg_mode: must be L2 or Entropy")
        steps = ["alpha_theta"]
        if self.method == "barfi":
            steps += ["alpha_phi", "alpha_varphi"]
        if self.method == "actor_critic":
            steps.append("alpha_critic")
        for name in steps:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name}: step size must be positive")
        for name in ("alpha_phi", "alpha_varphi", "alpha_critic", "lambda_theta", "lambda_phi", "lambda_gamma",
                     "outer_batch", "horizon"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name}: must be non-negative")
        for name in ("delta", "N0", "Ni", "n", "buffer_capacity", "total_episodes"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name}: must be at least 1")
        if not self.eta > 0:
            raise ConfigError("eta: must be positive")
        if not 0 <= self.outer_gamma <= 1:
            raise ConfigError("outer_gamma: must lie in [0, 1]")
        if self.seed < 0:
            raise ConfigError("seed: must be non-negative")
        return self

    def replace(self, **changes):
        return dataclasses.replace(self, **changes).validate()

    def to_dict(self):
        return dataclasses.asdict(self)


# best-performing values per environment; keys absent here keep the class defaults
ENV_DEFAULTS = {
    "gridworld": dict(alpha_theta=1e-3, alpha_phi=5e-3, alpha_varphi=5e-3, lambda_theta=0.25, lambda_phi=0.0625,
                      lambda_gamma=4.0, buffer_capacity=1000, eta=5e-4, N0=150, total_episodes=3000),
    "mountaincar": dict(alpha_theta=0.015625, alpha_phi=0.002, alpha_varphi=0.0625, lambda_theta=0.0,
                        lambda_phi=0.0, lambda_gamma=0.25, buffer_capacity=50, eta=1e-3, N0=50,
                        total_episodes=500),
    "cartpole": dict(alpha_theta=1e-3, alpha_phi=1e-3, alpha_varphi=5e-3, lambda_theta=1.0, lambda_phi=0.0,
                     lambda_gamma=4.0, buffer_capacity=10000, eta=5e-4, N0=150, total_episodes=1000),
    "bandit": dict(alpha_theta=1e-2, alpha_phi=1e-2, alpha_varphi=1e-2, lambda_theta=0.25, lambda_phi=0.0,
                   lambda_gamma=0.25, buffer_capacity=100, eta=1e-2, N0=10, total_episodes=200),
}

METHOD_DEFAULTS = {
    ("mountaincar", "reinforce"): dict(alpha_theta=0.125, lambda_theta=0.0, outer_gamma=0.9),
    ("mountaincar", "actor_critic"): dict(alpha_theta=0.03125, lambda_theta=0.25, alpha_critic=0.125),
    ("cartpole", "actor_critic"): dict(alpha_theta=5e-4, lambda_theta=0.0),
    # summed 500-step episodes put lambda_max of the inner Hessian near 1e7, so eta must sit below 2e-7
    ("cartpole", "barfi"): dict(alpha_theta=1e-4, eta=5e-8),
}

_REINFORCE_FAMILY = ("naive", "potential_state", "potential_action", "reinforce_rp")


def defaults_for(env, method):
    values = dict(ENV_DEFAULTS.get(env, {}))
    family = "reinforce" if method in _REINFORCE_FAMILY else method
    values.update(METHOD_DEFAULTS.get((env, family), {}))
    return values


def make_config(env, aux_variant, method, **overrides):
    fields = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = sorted(set(overrides) - fields)
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(unknown)}")
    values = defaults_for(env, method)
    values.update(overrides)
    return ExperimentConfig(env, aux_variant, method, **values).validate()


def _coerce(name, kind, text):
    try:
        if kind is bool:
            low = text.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(text)
            return low in ("true", "1", "yes")
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
        return text
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {text!r} as {kind.__name__}") from None


def parse_config(text):
    kinds = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in kinds:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = _coerce(key, kinds[key], value)
    missing = [k for k in REQUIRED if k not in raw]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    env, aux, method = (raw.pop(k) for k in REQUIRED)
    return make_config(env, aux, method, **raw)


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())


def dump_config(cfg):
    return "".join(f"{k} = {v}\n" for k, v in cfg.to_dict().items())
