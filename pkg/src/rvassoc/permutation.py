"""Deterministic permutation engine for empirical p-values.

Significance of every score in this package is assessed by comparing the
observed value against the score recomputed on phenotypes shuffled under
the null. Two shuffling modes are supported:

- global: the phenotype vector is permuted across all individuals;
- local: the phenotype is permuted independently within each stratum of a
  covariate factor, which preserves the factor's marginal association and
  therefore tests only for effects beyond it.

P-values use the add-one estimator ``(1 + #{T_b >= T_obs}) / (B + 1)``,
which can never return zero and keeps the test valid at any permutation
count; ties count toward the null (conservative).

Determinism contract: permutation ``b`` is drawn from a dedicated RNG
substream keyed by ``(seed, b)``, so the full set of permuted statistics is
a pure function of (inputs, seed, B, mode) and is identical whether the
batches run serially or across worker processes, in any scheduling order.
Statistic callables must be picklable when ``n_workers > 1`` (the reusable
score objects in :mod:`rvassoc.scores` and :mod:`rvassoc.baselines` are).
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .data import GenotypeMatrix, Phenotype, StratumFactor
from .scores import InteractionStat, MarginalStat, StatisticValue

GLOBAL = "global"
LOCAL = "local"


@dataclass(frozen=True)
class PermutationPlan:
    """How to draw null permutations: count, seed, and shuffling mode."""

    n_permutations: int
    seed: int
    mode: str = GLOBAL
    strata: StratumFactor | None = None

    def __post_init__(self):
        if self.n_permutations < 1:
            raise ValueError("n_permutations must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")
        if self.mode not in (GLOBAL, LOCAL):
            raise ValueError(f"unknown permutation mode {self.mode!r}")
        if self.mode == LOCAL and self.strata is None:
            raise ValueError("local permutation requires a stratum factor")


@dataclass(frozen=True)
class TestResult:
    """Outcome of one permutation test."""

    statistic: StatisticValue
    p_value: float
    n_permutations: int
    seed: int
    method: str

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "statistic": self.statistic.value,
            "n_terms": self.statistic.n_terms,
            "p_value": self.p_value,
            "n_permutations": self.n_permutations,
            "seed": self.seed,
        }


def _substream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for permutation ``index`` under ``seed``."""
    return np.random.default_rng(np.random.SeedSequence((seed, index)))


def _level_indices(levels: np.ndarray | None) -> list[np.ndarray] | None:
    if levels is None:
        return None
    return [np.flatnonzero(levels == j) for j in range(int(levels.max()) + 1)]


def _permute_once(
    y_values: np.ndarray,
    level_idx: list[np.ndarray] | None,
    rng: np.random.Generator,
) -> np.ndarray:
    if level_idx is None:
        return y_values[rng.permutation(y_values.size)]
    out = y_values.copy()
    for idx in level_idx:
        out[idx] = y_values[idx][rng.permutation(idx.size)]
    return out


def _stat_batch(
    stats: Sequence[Callable[[np.ndarray], float]],
    y_values: np.ndarray,
    levels: np.ndarray | None,
    seed: int,
    start: int,
    stop: int,
) -> np.ndarray:
    level_idx = _level_indices(levels)
    out = np.empty((stop - start, len(stats)))
    for b in range(start, stop):
        permuted = _permute_once(y_values, level_idx, _substream(seed, b))
        for s, stat in enumerate(stats):
            out[b - start, s] = stat(permuted)
    return out


def permuted_statistics(
    stats: Sequence[Callable[[np.ndarray], float]],
    y: Phenotype,
    plan: PermutationPlan,
    n_workers: int = 1,
) -> np.ndarray:
    """Evaluate one or more statistics on every permutation of the plan.

    Returns an array of shape ``(n_permutations, len(stats))`` whose row
    ``b`` holds the statistics of permutation ``b``. The result does not
    depend on ``n_workers``.
    """
    if plan.strata is not None and plan.strata.n_individuals != y.n_individuals:
        raise ValueError("stratum factor and phenotype must cover the same individuals")
    levels = plan.strata.levels if plan.mode == LOCAL else None
    n_perm = plan.n_permutations
    if n_workers <= 1 or n_perm < 2 * n_workers:
        return _stat_batch(stats, y.values, levels, plan.seed, 0, n_perm)
    bounds = np.linspace(0, n_perm, n_workers + 1).astype(int)
    args = [
        (stats, y.values, levels, plan.seed, int(lo), int(hi))
        for lo, hi in zip(bounds[:-1], bounds[1:])
    ]
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        chunks = list(pool.map(_stat_batch, *zip(*args)))
    return np.concatenate(chunks, axis=0)


def permute_pvalue(
    stat: Callable[[np.ndarray], float],
    y: Phenotype,
    plan: PermutationPlan,
    method: str = "",
    n_workers: int = 1,
) -> TestResult:
    """Permutation p-value of a single statistic.

    ``stat`` maps a phenotype value array (0/1 for dichotomous traits) to a
    float and is evaluated once on the observed phenotype and once per
    permutation; it must be reentrant. The p-value is
    ``(1 + #{T_b >= T_obs}) / (B + 1)`` and therefore lies in
    ``[1/(B+1), 1]``.
    """
    t_obs = float(stat(y.values))
    permuted = permuted_statistics([stat], y, plan, n_workers)[:, 0]
    exceed = int(np.sum(permuted >= t_obs))
    p_value = (1 + exceed) / (plan.n_permutations + 1)
    observed = StatisticValue(t_obs, int(getattr(stat, "n_terms", 0)))
    return TestResult(observed, p_value, plan.n_permutations, plan.seed, method)


def minp_combination(perm_stats: np.ndarray, observed: np.ndarray):
    """Combine several statistics through the minimum of their p-values.

    Parameters
    ----------
    perm_stats : ndarray, shape (B, S)
        Statistics of S tests on B shared permutations.
    observed : ndarray, shape (S,)
        The observed statistics.

    Returns
    -------
    component_p : ndarray, shape (S,)
        Add-one p-value of each component test.
    minp_observed : float
        Minimum of the component p-values.
    p_value : float
        Significance of the minimum itself: each permutation ``b`` receives
        component p-values ``#{b' : T_b' >= T_b} / B`` (its own value
        included), their minimum forms the null sample, and the final
        p-value is ``(1 + #{min_b <= minp_observed}) / (B + 1)``.
    """
    perm_stats = np.asarray(perm_stats, dtype=np.float64)
    observed = np.asarray(observed, dtype=np.float64)
    n_perm, n_stats = perm_stats.shape
    component_p = (1 + np.sum(perm_stats >= observed[np.newaxis, :], axis=0)) / (n_perm + 1)
    minp_observed = float(component_p.min())
    null_p = np.empty_like(perm_stats)
    for s in range(n_stats):
        ordered = np.sort(perm_stats[:, s])
        below = np.searchsorted(ordered, perm_stats[:, s], side="left")
        null_p[:, s] = (n_perm - below) / n_perm
    null_min = null_p.min(axis=1)
    p_value = (1 + int(np.sum(null_min <= minp_observed))) / (n_perm + 1)
    return component_p, minp_observed, p_value


def adaptive_pstar(
    g: GenotypeMatrix,
    y: Phenotype,
    plan: PermutationPlan,
    n_workers: int = 1,
) -> TestResult:
    """Adaptive test taking the better of the marginal and pairwise scores.

    Both scores are evaluated on one shared set of permutations; the
    observed statistic is the minimum of their two add-one p-values, and its
    own significance comes from the min-p null distribution over the same
    permutations (see :func:`minp_combination`).

    The returned ``statistic`` holds the observed minimum p-value (smaller
    is more extreme) with ``n_terms = 2`` for the two component scores.
    """
    marginal = MarginalStat(g, y.trait)
    pairwise = InteractionStat(g, y.trait)
    observed = np.array([marginal(y.values), pairwise(y.values)])
    perm_stats = permuted_statistics([marginal, pairwise], y, plan, n_workers)
    _, minp_observed, p_value = minp_combination(perm_stats, observed)
    return TestResult(
        StatisticValue(minp_observed, 2),
        p_value,
        plan.n_permutations,
        plan.seed,
        "pstar",
    )
