"""Belief-space metrics and long-run values of decision processes.

The package computes a transport-like metric between finitely supported
distributions of beliefs, posterior (disintegration) maps, and limit
values of gambling houses, finite MDPs, POMDPs and repeated games with an
informed controller under arbitrary payoff evaluations.
"""

from .core import (
    BeliefDist,
    Evaluation,
    InvalidArgumentError,
    JointDist,
    SimplexPoint,
    dirac,
    impatience,
    joint_l1_distance,
    l1_distance,
    make_evaluation_cesaro,
    make_evaluation_discounted,
    make_evaluation_window,
)
from .dp import (
    FiniteMDP,
    GamblingHouse,
    InvariantCouple,
    LimitValueCertificate,
    block_strategy_payoff_bound,
    check_invariant_couple,
    excessive_check,
    limit_value_lp,
    max_invariant_payoff,
    value_theta_house,
    value_theta_mdp,
    window_transform,
)
from .lp import (
    LinearProgram,
    LpSolution,
    LpSolverError,
    MatrixGame,
    matrix_game_value,
    solve_lp,
)
from .metric import (
    DualityWitness,
    MatrixFamily,
    TransportPlan,
    disintegration_pair,
    dstar_distance,
    dstar_lower_bound,
    kr_distance,
    posterior_map,
    random_matrix_families,
)
from .partialobs import (
    BeliefGrid,
    BeliefMdp,
    InformedGame,
    PomdpModel,
    belief_update,
    cav_u,
    grid_value_theta,
    informed_to_belief_mdp,
    pomdp_to_belief_mdp,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
