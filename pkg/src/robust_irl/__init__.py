"""MCE IRL and its robust two-player variant under transition-dynamics mismatch."""

from types import ModuleType as _ModuleType

from .bounds import (
    BoundInputs,
    constructive_gaps,
    corollary_alpha_choice,
    infeasible_gap_bound,
    kappa,
    lemma1_pol_bound,
    reward_transfer_bound,
    robust_gap_bound,
    soft_expert_gap_bound,
    thm1_gap_bound,
)
from .envs import PRESETS, make_constructive, make_gridworld, make_noisy, make_objectworld, make_preset
from .experiment import ExperimentConfig, ResultRow, run_experiment
from .feasibility import check_feasibility, numerical_rank, solve_matching_policy
from .irl import IrlConfig, IrlResult, mce_irl, robust_mce_irl
from .mdp import (
    ConfigurationError,
    ConvergenceError,
    DomainError,
    RewardModel,
    ShapeError,
    TabularMdp,
    dyn_distance,
    expected_return,
    pol_distance,
    state_occupancy,
)
from .solvers import soft_value_iteration, two_player_soft_vi, value_iteration

__all__ = [n for n, v in dict(globals()).items() if not n.startswith("_") and not isinstance(v, _ModuleType)]
