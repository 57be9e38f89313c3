"""Exact and Monte-Carlo computations for finite exchangeable sequences."""

from finetti.ensemble import (
    PushforwardEnsemble,
    concentration_profile,
    convergence_sweep,
    ensemble_poly_expectation,
    moment_discrepancy,
    pushforward_ensemble,
)
from finetti.exceptions import (
    ConvergenceError,
    ExactCapError,
    NumericalError,
    RankDeficiencyError,
    ValidationError,
)
from finetti.finite import (
    BayesExpansion,
    DfGapReport,
    EmpiricalMeasure,
    EmpiricalMeasureTransformer,
    bayes_expansion_check,
    conditional_law_given_counts,
    df_gap,
    empirical_eval,
    empirical_product_moment_exact,
    mc_joint_estimate,
    tail_contributions,
    tail_mass,
)
from finetti.measures import (
    Alphabet,
    Dist,
    Event,
    atoms_of,
    disjointify_event_tuple,
    dist_prob,
)
from finetti.models import (
    FiniteMixture,
    JointTable,
    PolyaUrn,
    count_distribution,
    exchangeability_check_exact,
    joint_event_prob,
    joint_prob,
    sample,
)
from finetti.moments import MomentTable, check_complete_monotonicity, moments_from_model
from finetti.recovery import (
    AtomicMeasure,
    GridMeasure,
    GridMixingRecovery,
    PronyAtomicRecovery,
    recover_atoms_prony,
    recover_mixing_grid,
)

__version__ = "0.1.0"
