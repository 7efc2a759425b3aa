"""Bond percolation on random split trees and complete b-ary trees.

Monte Carlo construction of random split trees, supercritical Bernoulli bond
percolation, exact small-case oracles, numerical evaluation of the limit laws
(continuous Luria-Delbruck and spectrally positive Levy), and a seeded,
reproducible experiment harness with a CLI front end.
"""

from splitperc.splitvec import (
    SplitFamily,
    SplitParams,
    FamilyConstants,
    binary_search_family,
    spacings_family,
    deterministic_family,
    dirichlet_family,
    parse_family,
    preset_params,
    validate_params,
    sample_split_vector,
    family_constants,
    mellin,
)
from splitperc.treegen import SplitTree, TreeStats, build_tree, tree_stats, subtree_profile, sample_ball_depth, lca_depth
from splitperc.perc import ClusterDecomposition, percolation_param, percolate, root_cluster_sizes, root_identity_check
from splitperc.regtree import regular_size, simulate_regular, exact_root_pmf, theorem4_statistic
from splitperc.limitlaw import (
    LimitLaw,
    AtomicLevyMeasure,
    ld_cf,
    luria_delbruck_law,
    cdf,
    cdf_dual,
    quantile,
    theorem2_limit,
    theorem1_limit,
    lambda_rho,
    levy_rho_law,
    theorem4_limit,
)
from splitperc.renewal import explore_count, explore_sums, renewal_profile, BudgetExceeded
from splitperc.harness import (
    ExperimentConfig,
    ExperimentReport,
    fluct_statistic,
    ks_distance,
    hill_estimator,
    run_experiment,
    estimate_family_constants,
)

__version__ = "0.1.0"
