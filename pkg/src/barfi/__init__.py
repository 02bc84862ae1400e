"""Behavior-alignment reward learning by implicit bi-level optimization."""
from .config import ExperimentConfig, load_config, make_config
from .envs import Aux, make_env
from .harness import evaluate, run, run_barfi, run_baseline
from .implicit import NeumannConfig, hvp, neumann_vhinv, outer_gradients, phi_update, varphi_update
from .inner import ReplayBuffer, Trajectory, discounted_returns, inner_converge
from .policy import SoftmaxLinearPolicy
from .reward import AlignmentReward, LearnedDiscount

__version__ = "0.1.0"
