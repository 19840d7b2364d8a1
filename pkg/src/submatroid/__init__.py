"""Greedy maximisation of monotone submodular functions over matroids, with curvature and discriminant guarantees."""
from .analysis import (
    GuaranteeReport,
    analyze_greedy,
    analyze_online,
    analyze_partition,
    curvature,
    curvature_bound,
    discriminant_general,
    discriminant_online,
    discriminant_partition,
    exchange_ordering,
    first_forced_iteration,
    forced_tail,
    matroid_greedy_bound,
    min_discriminant,
    online_greedy_bound,
    partition_curvature,
    partition_greedy_bound,
    refined_bound,
)
from .core import (
    CoverageValuation,
    ExplicitMatroid,
    GroundSet,
    Instance,
    ModularValuation,
    PairPartitionMatroid,
    PartitionInstance,
    PartitionMatroid,
    TabularValuation,
    UniformMatroid,
    eligible_extensions,
    marginal_gain,
    validate_oracles,
)
from .greedy import GreedyTrace, StepRecord, TiePolicy, run_greedy, run_greedy_m, run_greedy_on
from .oracle import (
    brute_force_assignment,
    brute_force_curvature,
    brute_force_optimum,
    chain_optimum,
    exact_optimum,
    exhaustive_competitive_ratio,
    verify_guarantee,
)

__version__ = "0.1.0"
