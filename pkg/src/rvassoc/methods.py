"""Named test methods: one permutation-backed runner per method tag.

Tags are the package's single vocabulary for methods, shared by the CLI,
the power harness, and result records:

=============  ========================================================
i1             marginal partition score
i2             pairwise gene-gene partition score
pstar          adaptive min-p combination of i1 and i2
i2star-global  stratified score, phenotype permuted across everyone
i2star-local   stratified score, phenotype permuted within strata
cmc            carrier-collapsing baseline
ws             frequency-weighted rank-sum baseline
vt             variable-threshold burden baseline
=============  ========================================================
"""

from __future__ import annotations

from .baselines import BaselineConfig, CmcStat, VtStat, WsStat
from .data import GenotypeMatrix, Phenotype, StratumFactor
from .errors import IncompatibleMethodError
from .permutation import (
    GLOBAL,
    LOCAL,
    PermutationPlan,
    TestResult,
    adaptive_pstar,
    permute_pvalue,
)
from .scores import InteractionStat, MarginalStat, StratifiedStat

METHOD_TAGS = ("i1", "i2", "pstar", "i2star-global", "i2star-local", "cmc", "ws", "vt")

STRATIFIED_METHODS = ("i2star-global", "i2star-local")


def run_method(
    method: str,
    g: GenotypeMatrix,
    y: Phenotype,
    *,
    n_permutations: int,
    seed: int,
    strata: StratumFactor | None = None,
    config: BaselineConfig | None = None,
    n_workers: int = 1,
) -> TestResult:
    """Run one named method and return its permutation test result.

    Raises
    ------
    IncompatibleMethodError
        For an unknown tag, a stratified method without a stratum factor,
        or a stratified method on a continuous trait.
    """
    if method not in METHOD_TAGS:
        raise IncompatibleMethodError(
            f"unknown method {method!r}; expected one of {', '.join(METHOD_TAGS)}"
        )
    if method in STRATIFIED_METHODS:
        if strata is None:
            raise IncompatibleMethodError(f"method {method!r} requires a stratum factor")
        if not y.is_dichotomous:
            raise IncompatibleMethodError(
                f"method {method!r} is defined for dichotomous traits only"
            )
    mode = LOCAL if method == "i2star-local" else GLOBAL
    plan = PermutationPlan(n_permutations, seed, mode=mode,
                           strata=strata if method in STRATIFIED_METHODS else None)
    if method == "pstar":
        return adaptive_pstar(g, y, plan, n_workers=n_workers)
    if method == "i1":
        stat = MarginalStat(g, y.trait)
    elif method == "i2":
        stat = InteractionStat(g, y.trait)
    elif method in STRATIFIED_METHODS:
        stat = StratifiedStat(g, strata)
    elif method == "cmc":
        stat = CmcStat(g, y.trait, config)
    elif method == "ws":
        stat = WsStat(g, y.trait)
    else:
        stat = VtStat(g, y.trait, config)
    return permute_pvalue(stat, y, plan, method=method, n_workers=n_workers)
