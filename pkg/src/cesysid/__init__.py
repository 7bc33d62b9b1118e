"""Copula-entropy identification of governing-equation terms in dynamical systems."""

__version__ = "0.1.0"

from .copula import CEEstimate, RankMatrix, copula_entropy, empirical_copula, knn_entropy
from .diffop import DerivativeMatrix, forward_difference
from .dynsys import (
    SimConfig,
    StateTrajectory,
    SystemSpec,
    get_system,
    integrate_rk4,
    lorenz_rhs,
    random_initial_state,
    register_system,
    simulate,
)
from .identify import (
    CEMatrix,
    IdentificationReport,
    PermutationConfig,
    identify,
    permutation_null,
    rank_terms,
    score_terms,
)
from .terms import TermSpec, build_terms, evaluate_terms
