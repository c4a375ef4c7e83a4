"""Baseline collapsing tests: CMC, weighted-sum, and variable-threshold.

Minimal permutation-based forms of three standard rare-variant tests, kept
deliberately simple so that every method in the package shares one
inferential framework (the permutation engine) and power comparisons are
like for like:

- CMC-style collapsing (Li & Leal 2008): individuals collapse to a single
  carrier indicator over the variants below a MAF cutoff; the statistic is
  the squared difference in carrier proportion between cases and controls
  (for a quantitative trait, the squared difference in mean response
  between carriers and non-carriers).
- Weighted sum (Madsen & Browning 2009): variants are weighted by
  ``sqrt(N * q_i * (1 - q_i))`` with ``q_i`` the control-sample allele
  frequency smoothed by a +1 pseudo-count, so rarer variants count more;
  the statistic is the case-rank-sum of the per-individual weighted scores
  (midranks for ties). The control frequencies, and hence the weights, are
  recomputed on every permuted labeling. For a quantitative trait the
  rank-sum is replaced by the covariance between the score ranks and the
  response, with frequencies taken from the full sample (fixed across
  permutations); this keeps the test one-directional like the original.
- Variable threshold (Price et al. 2010): for each candidate MAF threshold
  the allele-count burden over qualifying variants is formed per
  individual and standardized against the centered phenotype,
  ``z(t) = sum_j c_j(t) (y_j - ybar) / sqrt(sum_j c_j(t)^2)``; the
  statistic is the maximum over thresholds, recomputed on every
  permutation so the maximization stays inside the null.

The weighted-sum rank statistic and the variable-threshold maximum are
signed/directional quantities; unlike the partition scores they are not
sums of squares, so only the squared CMC statistic is guaranteed
non-negative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .data import CONTINUOUS, DICHOTOMOUS, GenotypeMatrix, Phenotype, summarize_variants
from .scores import StatisticValue


@dataclass(frozen=True)
class BaselineConfig:
    """Tuning knobs for the baseline tests.

    ``cmc_cutoff`` is the collapsing MAF threshold. ``vt_thresholds`` is the
    candidate threshold set for the variable-threshold test; ``None`` uses
    the sorted distinct sample MAFs of the polymorphic variants.
    """

    cmc_cutoff: float = 0.01
    vt_thresholds: tuple[float, ...] | None = None

    def __post_init__(self):
        if not (0.0 < self.cmc_cutoff <= 0.5):
            raise ValueError(f"cmc_cutoff must be in (0, 0.5], got {self.cmc_cutoff}")
        if self.vt_thresholds is not None:
            ts = tuple(float(t) for t in self.vt_thresholds)
            if len(ts) == 0:
                raise ValueError("vt_thresholds must be non-empty when given")
            if any(not (0.0 < t <= 0.5) for t in ts):
                raise ValueError("vt_thresholds must lie in (0, 0.5]")
            object.__setattr__(self, "vt_thresholds", ts)


class CmcStat:
    """Carrier-collapsing statistic; reusable across permutations."""

    def __init__(self, g: GenotypeMatrix, trait: str, config: BaselineConfig | None = None):
        config = config or BaselineConfig()
        self.trait = trait
        summary = summarize_variants(g)
        collapse = (summary.sample_maf <= config.cmc_cutoff) & (summary.allele_count > 0)
        self.n_terms = int(collapse.sum())
        carrier = (g.genotypes[:, collapse] > 0).any(axis=1)
        self._carrier = carrier.astype(np.float64)
        self._n_carriers = float(carrier.sum())

    def __call__(self, y_values: np.ndarray) -> float:
        n = y_values.size
        carrier_sum = float(y_values @ self._carrier)
        if self.trait == DICHOTOMOUS:
            n_cases = float(y_values.sum())
            p_case = carrier_sum / n_cases
            p_ctrl = (self._n_carriers - carrier_sum) / (n - n_cases)
            return (p_case - p_ctrl) ** 2
        if self._n_carriers == 0 or self._n_carriers == n:
            return 0.0
        mean_carr = carrier_sum / self._n_carriers
        mean_non = (float(y_values.sum()) - carrier_sum) / (n - self._n_carriers)
        return (mean_carr - mean_non) ** 2


class WsStat:
    """Frequency-weighted rank statistic; reusable across permutations."""

    def __init__(self, g: GenotypeMatrix, trait: str):
        self.trait = trait
        self.n_terms = g.n_variants
        self._genotypes = g.genotypes.astype(np.float64)
        # one indicator column per allele copy: a homozygous carrier and two
        # heterozygous carriers of equally-weighted variants then have the
        # same contribution multiset and tie exactly under _canonical_scores
        self._allele_indicators = np.concatenate(
            [(g.genotypes >= 1).astype(np.float64), (g.genotypes >= 2).astype(np.float64)],
            axis=1,
        )
        self._n = g.n_individuals
        if trait == CONTINUOUS:
            # pooled-sample frequencies: the scores are label-free and fixed
            alleles = self._genotypes.sum(axis=0)
            q = (alleles + 1.0) / (2.0 * self._n + 2.0)
            ranks = rankdata(self._scores(q))
            self._centered_ranks = ranks - ranks.mean()

    def _scores(self, q: np.ndarray) -> np.ndarray:
        # summing each row's per-allele contributions in ascending order makes
        # rows with equal contribution multisets bitwise-equal, so midranks at
        # mathematical ties do not depend on accumulation order
        inv_w = 1.0 / np.sqrt(self._n * q * (1.0 - q))
        contributions = self._allele_indicators * np.concatenate([inv_w, inv_w])
        return np.sort(contributions, axis=1).sum(axis=1)

    def __call__(self, y_values: np.ndarray) -> float:
        if self.trait == DICHOTOMOUS:
            controls = 1.0 - y_values
            ctrl_alleles = controls @ self._genotypes
            q = (ctrl_alleles + 1.0) / (2.0 * float(controls.sum()) + 2.0)
            return float(rankdata(self._scores(q)) @ y_values)
        return float(self._centered_ranks @ (y_values - y_values.mean())) / self._n


class VtStat:
    """Variable-threshold burden statistic; reusable across permutations."""

    def __init__(self, g: GenotypeMatrix, trait: str, config: BaselineConfig | None = None):
        config = config or BaselineConfig()
        self.trait = trait
        summary = summarize_variants(g)
        maf = summary.sample_maf
        if config.vt_thresholds is not None:
            thresholds = np.asarray(config.vt_thresholds, dtype=np.float64)
        else:
            thresholds = np.unique(maf[summary.allele_count > 0])
        if thresholds.size == 0:
            raise ValueError("no candidate thresholds: every variant is monomorphic")
        gf = g.genotypes.astype(np.float64)
        qualifies = maf[np.newaxis, :] <= thresholds[:, np.newaxis]
        burdens = np.ascontiguousarray((qualifies @ gf.T).T)  # individuals x thresholds
        norms = np.sqrt(np.sum(np.square(burdens), axis=0))
        usable = norms > 0
        if not np.any(usable):
            raise ValueError("no threshold yields a non-zero burden")
        self._burdens = burdens[:, usable]
        self._norms = norms[usable]
        self.n_terms = int(usable.sum())

    def __call__(self, y_values: np.ndarray) -> float:
        centered = y_values - y_values.mean()
        return float(np.max((centered @ self._burdens) / self._norms))


def _as_result(stat, y: Phenotype) -> StatisticValue:
    if stat.trait != y.trait:
        raise ValueError("statistic was built for a different trait kind")
    return StatisticValue(stat(y.values), stat.n_terms)


def cmc_score(g: GenotypeMatrix, y: Phenotype, config: BaselineConfig | None = None) -> StatisticValue:
    """One-shot CMC collapsing statistic for the observed phenotype."""
    return _as_result(CmcStat(g, y.trait, config), y)


def ws_score(g: GenotypeMatrix, y: Phenotype) -> StatisticValue:
    """One-shot weighted-sum rank statistic for the observed phenotype."""
    return _as_result(WsStat(g, y.trait), y)


def vt_score(g: GenotypeMatrix, y: Phenotype, config: BaselineConfig | None = None) -> StatisticValue:
    """One-shot variable-threshold statistic for the observed phenotype."""
    return _as_result(VtStat(g, y.trait, config), y)
