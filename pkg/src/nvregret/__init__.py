"""Exact worst-case expected regret for weighted empirical newsvendor policies.

The package evaluates, tunes, and bounds data-driven newsvendor policies
when each historical demand distribution may deviate from the target
distribution by a known Kolmogorov distance.  The worst case over
distributions reduces to Bernoulli demands, worst histories, and a
one-dimensional search over the out-of-sample mean; the `regret` module
implements that reduction exactly, `policies` evaluates the policy-CDF
functional it needs, `tuning` selects policies (minimax mixtures,
discount factors, neighbor counts), `bounds` provides reference bounds,
and `oracle` re-derives everything by brute force at small n.
"""

from .model import (
    Branch,
    BernoulliProfile,
    DissimilarityProfile,
    InfeasibleError,
    LossParams,
    MixtureComponent,
    MixtureOS,
    OrderStatistic,
    PolicySpec,
    RegretReport,
    TabulatedCounting,
    ValidationError,
    VerificationError,
    WeightedErm,
    erm,
    ewerm,
    kernel_weights,
    knn,
    make_loss,
    validate_policy,
)
from .regret import (
    BranchObjective,
    branch_regret,
    branch_regret_grid,
    expected_regret_bernoulli,
    limiting_regret_erm,
    oracle_cost_bernoulli,
    psi,
    worst_case_regret,
)
from .bounds import (
    BoundConfig,
    BoundVariant,
    CnResult,
    ComplexityScale,
    Normalization,
    bound_limit,
    bound_sample_complexity,
    mohri_expected_bound,
    no_data_regret,
    rademacher_cn,
    signed_sum_positive_mean,
    universal_lower_bound,
)
from .oracle import (
    DiscreteDistribution,
    bruteforce_slack,
    bruteforce_worst_case,
    exact_expected_regret,
    mc_action_cdf,
    verify_not_order_statistic,
)
from .simplex import GameSolution, solve_zero_sum_game
from .tuning import (
    EwermResult,
    KnnResult,
    MixtureSolution,
    regret_curve,
    sample_complexity,
    tune_ewerm,
    tune_knn,
    tune_kstar_erm_dagger,
    tune_mixture_fixed_k,
)

__version__ = "0.1.0"
