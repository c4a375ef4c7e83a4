"""Partition-based association scores for rare variants.

Every statistic here follows the same template: form groups (partition
cells) of individuals from the genotype data, and accumulate, over all
groups, a squared deviation of the group's phenotype summary from the
sample-wide baseline, weighted by the squared group size:

- ``partition_influence`` uses non-overlapping cells given by explicit
  labels; the cell summary is the mean response and the weight is the
  squared cell size. This is the classical form that works for common
  variants but starves on rare ones, where almost every joint-genotype
  cell is empty or a singleton.
- ``marginal_score`` builds one overlapping cell per variant. For a
  case/control trait the cell summary is the fraction of that variant's
  minor alleles observed in cases and the weight is the squared allele
  count; for a quantitative trait the summary is the mean response of
  carriers (allele count still supplies the weight).
- ``interaction_score`` builds three cells per variant pair - carriers of
  the first variant only, of the second only, and of both - weighted by
  the squared number of individuals carrying either variant. Individuals
  carrying neither variant are not a cell.
- ``stratified_score`` recomputes the marginal score within each level of
  an environmental factor and sums across levels, which picks up both the
  factor's main effect and genotype-by-factor interaction.

Cells with zero weight contribute exactly zero, so all scores are total
functions of their inputs. Each score is a sum of non-negative terms;
accumulation uses numpy's pairwise summation over float64, which keeps
results within ~1e-14 relative error of exact arithmetic at the sample
sizes used here.

Statistics are evaluated many times against permuted phenotypes, so each
score also exists as a reusable callable (``MarginalStat`` etc.) that
precomputes every phenotype-independent quantity once and then maps a raw
phenotype value array to the statistic. The callables are picklable and
stateless after construction, which the permutation engine relies on for
process-based parallelism.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import CONTINUOUS, DICHOTOMOUS, GenotypeMatrix, Phenotype, StratumFactor


@dataclass(frozen=True)
class StatisticValue:
    """A computed score plus the number of nonzero-weight terms it summed."""

    value: float
    n_terms: int

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise ValueError(f"statistic value must be finite, got {self.value}")


@dataclass(frozen=True)
class WeightVector:
    """Per-variant non-negative weights, normalized to sum to one."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size < 1:
            raise ValueError("weights must be a non-empty 1-D array")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and non-negative")
        total = w.sum()
        if total == 0.0:
            raise ValueError("all weights are zero")
        w = w / total
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)


def _check_paired(g: GenotypeMatrix, y: Phenotype) -> None:
    if g.n_individuals != y.n_individuals:
        raise ValueError(
            f"genotype matrix has {g.n_individuals} individuals, "
            f"phenotype has {y.n_individuals}"
        )


def _squared_dev_sum(n: np.ndarray, value_sum: np.ndarray, center: float) -> float:
    """Sum of n_i^2 * (value_sum_i / n_i - center)^2 over entries with n_i > 0."""
    dev = value_sum / n - center
    return float(np.sum(np.square(n) * np.square(dev)))


class MarginalStat:
    """Reusable per-variant score: precomputes allele counts and carrier cells.

    Calling the instance with a phenotype value array (0/1 for the
    dichotomous trait) returns the score as a plain float.
    """

    def __init__(self, g: GenotypeMatrix, trait: str):
        if trait not in (DICHOTOMOUS, CONTINUOUS):
            raise ValueError(f"unknown trait kind {trait!r}")
        self.trait = trait
        gf = g.genotypes.astype(np.float64)
        counts = gf.sum(axis=0)
        nz = counts > 0
        self.n_terms = int(nz.sum())
        self._alleles = counts[nz]
        if trait == DICHOTOMOUS:
            # y @ columns gives per-variant minor alleles carried by cases
            self._columns = np.ascontiguousarray(gf[:, nz])
        else:
            carriers = (gf[:, nz] > 0).astype(np.float64)
            self._columns = np.ascontiguousarray(carriers)
            self._cell_sizes = carriers.sum(axis=0)

    def __call__(self, y_values: np.ndarray) -> float:
        center = float(y_values.mean())
        cell_sums = y_values @ self._columns
        if self.trait == DICHOTOMOUS:
            frac = cell_sums / self._alleles
        else:
            frac = cell_sums / self._cell_sizes
        dev = frac - center
        return float(np.sum(np.square(self._alleles) * np.square(dev)))


class InteractionStat:
    """Reusable pairwise score over the three carrier cells of each variant pair."""

    def __init__(self, g: GenotypeMatrix, trait: str):
        if trait not in (DICHOTOMOUS, CONTINUOUS):
            raise ValueError(f"unknown trait kind {trait!r}")
        self.trait = trait
        carriers = (g.genotypes > 0).astype(np.float64)
        per_variant = carriers.sum(axis=0)
        ii, jj = np.triu_indices(g.n_variants, k=1)
        both = (carriers.T @ carriers)[ii, jj]
        union = per_variant[ii] + per_variant[jj] - both
        keep = union > 0
        ii, jj, both, union = ii[keep], jj[keep], both[keep], union[keep]
        self.n_terms = int(keep.sum())
        self._carriers = carriers
        self._ii = ii
        self._jj = jj
        self._n_both = both
        self._n_only_i = per_variant[ii] - both
        self._n_only_j = per_variant[jj] - both
        self._union_sq = np.square(union)

    @staticmethod
    def _cell_sq_dev(count: np.ndarray, value_sum: np.ndarray, center: float) -> np.ndarray:
        """(cell mean - center)^2 where the cell is occupied, else 0."""
        occupied = count > 0
        mean = np.divide(value_sum, count, out=np.zeros_like(value_sum), where=occupied)
        dev = np.where(occupied, mean - center, 0.0)
        return np.square(dev)

    def __call__(self, y_values: np.ndarray) -> float:
        if self.n_terms == 0:
            return 0.0
        center = float(y_values.mean())
        # one small K x K product yields every cell's response sum: the
        # diagonal holds per-variant sums, off-diagonals the both-carrier cells
        cross = (self._carriers * y_values[:, np.newaxis]).T @ self._carriers
        per_variant = np.diagonal(cross)
        s_both = cross[self._ii, self._jj]
        s_only_i = per_variant[self._ii] - s_both
        s_only_j = per_variant[self._jj] - s_both
        bracket = (
            self._cell_sq_dev(self._n_both, s_both, center)
            + self._cell_sq_dev(self._n_only_i, s_only_i, center)
            + self._cell_sq_dev(self._n_only_j, s_only_j, center)
        )
        return float(np.sum(self._union_sq * bracket))


class StratifiedStat:
    """Reusable stratified marginal score (dichotomous trait only).

    Precomputes per-stratum allele counts; a call sums the per-stratum
    marginal scores, each measured against the global case fraction. With a
    single stratum the computation reduces exactly (bit for bit) to
    ``MarginalStat`` on the same data.
    """

    def __init__(self, g: GenotypeMatrix, strata: StratumFactor):
        if strata.n_individuals != g.n_individuals:
            raise ValueError(
                f"stratum factor covers {strata.n_individuals} individuals, "
                f"genotype matrix has {g.n_individuals}"
            )
        self.trait = DICHOTOMOUS
        gf = g.genotypes.astype(np.float64)
        self._groups = []
        self.n_terms = 0
        for idx in strata.level_indices():
            block = gf[idx]
            counts = block.sum(axis=0)
            nz = counts > 0
            self.n_terms += int(nz.sum())
            self._groups.append((idx, np.ascontiguousarray(block[:, nz]), counts[nz]))

    def __call__(self, y_values: np.ndarray) -> float:
        center = float(y_values.mean())
        parts = []
        for idx, columns, alleles in self._groups:
            if alleles.size == 0:
                continue
            cell_sums = y_values[idx] @ columns
            dev = cell_sums / alleles - center
            parts.append(float(np.sum(np.square(alleles) * np.square(dev))))
        return float(sum(parts))


def partition_influence(labels, y: Phenotype) -> StatisticValue:
    """Influence of a non-overlapping partition on the response.

    Parameters
    ----------
    labels : array-like
        Per-individual cell identifier (any integer coding); individuals
        sharing a label form one cell.
    y : Phenotype
        Response. A dichotomous phenotype is scored through its 0/1 coding,
        making the cell summary the case fraction and the baseline the
        overall case fraction.

    Returns
    -------
    StatisticValue
        Sum over occupied cells of ``(cell size)^2 * (cell mean - grand mean)^2``.
    """
    lab = np.asarray(labels)
    if lab.ndim != 1 or lab.size < 1:
        raise ValueError("labels must be a non-empty 1-D array")
    if lab.size != y.n_individuals:
        raise ValueError("labels and phenotype must have equal length")
    _, inverse = np.unique(lab, return_inverse=True)
    counts = np.bincount(inverse).astype(np.float64)
    sums = np.bincount(inverse, weights=y.values)
    grand = float(y.values.mean())
    value = _squared_dev_sum(counts, sums, grand)
    return StatisticValue(value, int(counts.size))


def marginal_score(g: GenotypeMatrix, y: Phenotype) -> StatisticValue:
    """Per-variant overlapping-cell association score.

    For a dichotomous trait each variant contributes
    ``n_i^2 * (p_i - case_fraction)^2`` where ``n_i`` counts its minor
    alleles in the whole sample and ``p_i`` is the fraction of those alleles
    observed in cases (a homozygous case contributes two alleles to both).
    For a continuous trait the deviation is between the mean response of the
    variant's carriers and the grand mean, still weighted by ``n_i^2``.
    Variants with ``n_i = 0`` contribute nothing.
    """
    _check_paired(g, y)
    stat = MarginalStat(g, y.trait)
    return StatisticValue(stat(y.values), stat.n_terms)


def weighted_marginal_score(g: GenotypeMatrix, y: Phenotype, w: WeightVector) -> StatisticValue:
    """Marginal score with externally supplied variant weights.

    Each variant contributes ``w_i * n_i * (deviation_i)^2``. With
    ``w_i = n_i / sum(n)`` this equals ``marginal_score / sum(n)``; other
    weightings let callers fold in outside knowledge (functional
    annotations, frequency priors) without changing the test machinery.
    """
    _check_paired(g, y)
    if w.weights.size != g.n_variants:
        raise ValueError(
            f"expected {g.n_variants} weights, got {w.weights.size}"
        )
    gf = g.genotypes.astype(np.float64)
    alleles = gf.sum(axis=0)
    keep = (alleles > 0) & (w.weights > 0)
    n_terms = int(keep.sum())
    if n_terms == 0:
        return StatisticValue(0.0, 0)
    center = float(y.values.mean())
    if y.trait == DICHOTOMOUS:
        cell_sums = y.values @ gf[:, keep]
        frac = cell_sums / alleles[keep]
    else:
        carriers = (gf[:, keep] > 0).astype(np.float64)
        frac = (y.values @ carriers) / carriers.sum(axis=0)
    dev = frac - center
    value = float(np.sum(w.weights[keep] * alleles[keep] * np.square(dev)))
    return StatisticValue(value, n_terms)


def interaction_score(g: GenotypeMatrix, y: Phenotype) -> StatisticValue:
    """Pairwise carrier-cell association score.

    For each unordered variant pair, individuals carrying only the first
    variant, only the second, and both form three cells; each occupied cell
    contributes its squared deviation (case fraction or mean response,
    matching the trait) from the sample baseline, and the bracketed sum is
    weighted by the squared count of individuals carrying either variant.
    """
    _check_paired(g, y)
    stat = InteractionStat(g, y.trait)
    return StatisticValue(stat(y.values), stat.n_terms)


def stratified_score(g: GenotypeMatrix, y: Phenotype, strata: StratumFactor) -> StatisticValue:
    """Marginal score accumulated within each stratum of a covariate factor.

    Only defined for dichotomous traits: within stratum ``j``, variant ``i``
    contributes ``n_ij^2 * (p_ij - case_fraction)^2`` with ``n_ij`` its
    allele count among that stratum's individuals, ``p_ij`` the fraction of
    those alleles from cases, and the baseline the global case fraction.
    """
    _check_paired(g, y)
    if not y.is_dichotomous:
        raise ValueError("the stratified score is defined for dichotomous traits only")
    if strata.n_individuals != y.n_individuals:
        raise ValueError("stratum factor and phenotype must cover the same individuals")
    stat = StratifiedStat(g, strata)
    return StatisticValue(stat(y.values), stat.n_terms)
