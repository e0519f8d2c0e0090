"""Monte Carlo and exact-enumeration harnesses."""

from .campaigns import CampaignResult, Summary, hurdle_campaign, median_ratios, runtime_campaign
from .drift import (
    CounterexampleResult,
    CrossoverOp,
    DriftReport,
    cluster_population,
    counterexample_drift,
    counterexample_population,
    enumerate_drift_exact,
    one_step_drift,
)
from .enumeration import (
    expected_distance_after,
    neutrality_defects,
    neutrality_gap,
    paired_flip_formula,
    paired_flip_lemma_defects,
)
from .equilibrium import EquilibriumReport, diversity_threshold, equilibrium_run
from .hitprob import (
    complementary_pair,
    exact_opt_hit,
    mc_jump_offset_success,
    mc_opt_hit,
    plateau_pairs,
)
from .parallel import map_replicates

__all__ = [
    "CampaignResult",
    "CounterexampleResult",
    "CrossoverOp",
    "DriftReport",
    "EquilibriumReport",
    "Summary",
    "cluster_population",
    "complementary_pair",
    "counterexample_drift",
    "counterexample_population",
    "diversity_threshold",
    "enumerate_drift_exact",
    "equilibrium_run",
    "exact_opt_hit",
    "expected_distance_after",
    "hurdle_campaign",
    "map_replicates",
    "mc_jump_offset_success",
    "mc_opt_hit",
    "median_ratios",
    "neutrality_defects",
    "neutrality_gap",
    "one_step_drift",
    "paired_flip_formula",
    "paired_flip_lemma_defects",
    "plateau_pairs",
    "runtime_campaign",
]
