"""Partition-based rare-variant association testing.

A numpy/scipy library providing:

- the partition family of association scores (marginal, pairwise
  gene-gene, stratified gene-environment, and their adaptive min-p
  combination) for case/control and quantitative traits;
- a deterministic permutation engine with global and within-stratum
  shuffling and reproducible parallel evaluation;
- permutation-based baseline tests (carrier collapsing, frequency-weighted
  rank sum, variable-threshold burden);
- a cohort simulator with a ten-scenario phenotype-model catalog and
  case-control ascertainment;
- a power-study harness tabulating empirical type-I error and power;
- tab-separated file formats and a CLI (``rvassoc test|simulate|power``).
"""

from .baselines import BaselineConfig, CmcStat, VtStat, WsStat, cmc_score, vt_score, ws_score
from .data import (
    CONTINUOUS,
    DICHOTOMOUS,
    GenotypeMatrix,
    Phenotype,
    StratumFactor,
    VariantSummary,
    filter_rare,
    summarize_variants,
)
from .errors import (
    AscertainmentError,
    DataFormatError,
    IncompatibleMethodError,
    NoRareVariantsError,
)
from .methods import METHOD_TAGS, run_method
from .permutation import (
    PermutationPlan,
    TestResult,
    adaptive_pstar,
    minp_combination,
    permute_pvalue,
    permuted_statistics,
)
from .power import PowerCell, PowerTable, StudyGrid, count_rejections, run_grid
from .scores import (
    InteractionStat,
    MarginalStat,
    StatisticValue,
    StratifiedStat,
    WeightVector,
    interaction_score,
    marginal_score,
    partition_influence,
    stratified_score,
    weighted_marginal_score,
)
from .simulate import (
    SCENARIO_IDS,
    Covariates,
    MafModel,
    ScenarioSpec,
    SimulatedCohort,
    draw_genotypes,
    make_scenario,
    simulate,
    simulate_continuous,
    simulate_dichotomous,
    with_sample_size,
)

__version__ = "0.1.0"

__all__ = [
    "AscertainmentError",
    "BaselineConfig",
    "CONTINUOUS",
    "CmcStat",
    "Covariates",
    "DICHOTOMOUS",
    "DataFormatError",
    "GenotypeMatrix",
    "IncompatibleMethodError",
    "InteractionStat",
    "METHOD_TAGS",
    "MafModel",
    "MarginalStat",
    "NoRareVariantsError",
    "PermutationPlan",
    "Phenotype",
    "PowerCell",
    "PowerTable",
    "SCENARIO_IDS",
    "ScenarioSpec",
    "SimulatedCohort",
    "StatisticValue",
    "StratifiedStat",
    "StratumFactor",
    "StudyGrid",
    "TestResult",
    "VariantSummary",
    "VtStat",
    "WeightVector",
    "WsStat",
    "adaptive_pstar",
    "cmc_score",
    "count_rejections",
    "draw_genotypes",
    "filter_rare",
    "interaction_score",
    "make_scenario",
    "marginal_score",
    "minp_combination",
    "partition_influence",
    "permute_pvalue",
    "permuted_statistics",
    "run_grid",
    "run_method",
    "simulate",
    "simulate_continuous",
    "simulate_dichotomous",
    "stratified_score",
    "summarize_variants",
    "vt_score",
    "weighted_marginal_score",
    "with_sample_size",
    "ws_score",
]
