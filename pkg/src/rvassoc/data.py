"""Core data model: genotypes, phenotypes, strata, and rare-variant filtering.

The genotype matrix is dense, one row per individual and one column per
variant site, with entries in {0, 1, 2} counting copies of the minor allele.
All containers are immutable after construction (their arrays are marked
read-only), so they can be shared freely across threads and worker
processes; every operation in the package is a pure function of them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NoRareVariantsError

DICHOTOMOUS = "dichotomous"
CONTINUOUS = "continuous"


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class GenotypeMatrix:
    """N x K minor-allele count matrix with per-variant labels.

    Parameters
    ----------
    genotypes : array-like of int, shape (n_individuals, n_variants)
        Minor-allele counts; every entry must be 0, 1 or 2.
    variant_ids : sequence of str, optional
        One label per variant column. Defaults to ``v1 .. vK``.
    """

    genotypes: np.ndarray
    variant_ids: tuple[str, ...] = field(default=())

    def __post_init__(self):
        g = np.asarray(self.genotypes)
        if g.ndim != 2 or g.shape[0] < 1 or g.shape[1] < 1:
            raise ValueError("genotype matrix must be 2-D with positive dimensions")
        if not np.issubdtype(g.dtype, np.integer):
            f = np.asarray(g, dtype=float)
            if not np.all(f == np.floor(f)):
                raise ValueError("genotype entries must be integers")
            g = f.astype(np.int8)
        if g.min() < 0 or g.max() > 2:
            raise ValueError("genotype entries must be in {0, 1, 2}")
        object.__setattr__(self, "genotypes", _frozen(g.astype(np.int8)))
        ids = tuple(self.variant_ids) or tuple(f"v{i + 1}" for i in range(g.shape[1]))
        if len(ids) != g.shape[1]:
            raise ValueError(f"expected {g.shape[1]} variant ids, got {len(ids)}")
        object.__setattr__(self, "variant_ids", ids)

    @property
    def n_individuals(self) -> int:
        return self.genotypes.shape[0]

    @property
    def n_variants(self) -> int:
        return self.genotypes.shape[1]

    def select_variants(self, index: np.ndarray) -> "GenotypeMatrix":
        """Submatrix restricted to the given variant columns (order preserved)."""
        idx = np.asarray(index)
        ids = tuple(np.asarray(self.variant_ids, dtype=object)[idx])
        return GenotypeMatrix(self.genotypes[:, idx], ids)


@dataclass(frozen=True)
class Phenotype:
    """Per-individual trait values, either case/control labels or reals.

    Use :meth:`dichotomous` or :meth:`continuous` to construct. Dichotomous
    values are stored as 0.0 (control) / 1.0 (case).
    """

    values: np.ndarray
    trait: str

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("phenotype must be a non-empty 1-D array")
        if self.trait == DICHOTOMOUS:
            if not np.all((v == 0.0) | (v == 1.0)):
                raise ValueError("dichotomous phenotype values must be 0 or 1")
            n_cases = int(v.sum())
            if n_cases == 0 or n_cases == v.size:
                raise ValueError("dichotomous phenotype needs at least one case and one control")
        elif self.trait == CONTINUOUS:
            if not np.all(np.isfinite(v)):
                raise ValueError("continuous phenotype values must be finite")
        else:
            raise ValueError(f"unknown trait kind {self.trait!r}")
        object.__setattr__(self, "values", _frozen(v))

    @classmethod
    def dichotomous(cls, labels) -> "Phenotype":
        return cls(np.asarray(labels, dtype=np.float64), DICHOTOMOUS)

    @classmethod
    def continuous(cls, values) -> "Phenotype":
        return cls(np.asarray(values, dtype=np.float64), CONTINUOUS)

    @property
    def n_individuals(self) -> int:
        return self.values.size

    @property
    def is_dichotomous(self) -> bool:
        return self.trait == DICHOTOMOUS

    @property
    def n_cases(self) -> int:
        if not self.is_dichotomous:
            raise ValueError("case counts are only defined for dichotomous traits")
        return int(self.values.sum())

    @property
    def n_controls(self) -> int:
        return self.n_individuals - self.n_cases


@dataclass(frozen=True)
class StratumFactor:
    """Per-individual level of a J-level environmental/covariate factor.

    Levels are integers in ``{0, ..., n_levels - 1}`` and every level must be
    occupied by at least one individual.
    """

    levels: np.ndarray
    n_levels: int = 0

    def __post_init__(self):
        lv = np.asarray(self.levels)
        if lv.ndim != 1 or lv.size < 1:
            raise ValueError("stratum levels must be a non-empty 1-D array")
        if not np.issubdtype(lv.dtype, np.integer):
            f = np.asarray(lv, dtype=float)
            if not np.all(f == np.floor(f)):
                raise ValueError("stratum levels must be integers")
            lv = f.astype(np.int64)
        if lv.min() < 0:
            raise ValueError("stratum levels must be non-negative")
        j = self.n_levels or int(lv.max()) + 1
        occupied = np.bincount(lv, minlength=j)
        if len(occupied) > j:
            raise ValueError(f"stratum level {int(lv.max())} out of range for {j} levels")
        if np.any(occupied == 0):
            missing = int(np.flatnonzero(occupied == 0)[0])
            raise ValueError(f"stratum level {missing} has no individuals")
        object.__setattr__(self, "levels", _frozen(lv.astype(np.int64)))
        object.__setattr__(self, "n_levels", j)

    @property
    def n_individuals(self) -> int:
        return self.levels.size

    def level_indices(self) -> list[np.ndarray]:
        """Index arrays of the individuals at each level, in level order."""
        return [np.flatnonzero(self.levels == j) for j in range(self.n_levels)]


@dataclass(frozen=True)
class VariantSummary:
    """Per-variant allele totals, carrier counts, and sample MAFs."""

    allele_count: np.ndarray
    carrier_count: np.ndarray
    sample_maf: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "allele_count", _frozen(self.allele_count))
        object.__setattr__(self, "carrier_count", _frozen(self.carrier_count))
        object.__setattr__(self, "sample_maf", _frozen(self.sample_maf))


def summarize_variants(g: GenotypeMatrix) -> VariantSummary:
    """Count minor alleles and carriers per variant.

    ``allele_count[i]`` sums the genotype column, ``carrier_count[i]`` counts
    individuals with at least one minor allele, and ``sample_maf[i]`` is
    ``allele_count[i] / (2 * n_individuals)`` estimated from the pooled sample.
    """
    entries = g.genotypes
    allele = entries.sum(axis=0, dtype=np.int64)
    carrier = (entries > 0).sum(axis=0, dtype=np.int64)
    maf = allele / (2.0 * g.n_individuals)
    return VariantSummary(allele, carrier, maf)


def filter_rare(g: GenotypeMatrix, maf_cutoff: float) -> GenotypeMatrix:
    """Keep variants with ``0 < allele_count`` and ``sample_maf <= maf_cutoff``.

    Monomorphic (all-zero) columns are dropped regardless of the cutoff: they
    contribute identically-zero terms to every statistic. Variant order and
    ids are preserved.

    Raises
    ------
    ValueError
        If the cutoff is outside ``(0, 0.5]``.
    NoRareVariantsError
        If no variant survives the filter.
    """
    if not (0.0 < maf_cutoff <= 0.5):
        raise ValueError(f"maf_cutoff must be in (0, 0.5], got {maf_cutoff}")
    summary = summarize_variants(g)
    keep = np.flatnonzero((summary.sample_maf <= maf_cutoff) & (summary.allele_count > 0))
    if keep.size == 0:
        raise NoRareVariantsError(
            f"no rare variants to test at MAF cutoff {maf_cutoff}"
        )
    return g.select_variants(keep)
