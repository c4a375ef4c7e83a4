"""Tests for the genotype/phenotype data model and rare-variant filtering."""

import numpy as np
import pytest

from rvassoc import (
    GenotypeMatrix,
    NoRareVariantsError,
    Phenotype,
    StratumFactor,
    filter_rare,
    summarize_variants,
)


def _random_matrix(rng, n=12, k=5):
    return GenotypeMatrix(rng.choice([0, 1, 2], size=(n, k), p=[0.6, 0.3, 0.1]))


class TestGenotypeMatrix:
    def test_rejects_out_of_range_codes(self):
        with pytest.raises(ValueError, match="in {0, 1, 2}"):
            GenotypeMatrix([[0, 3], [1, 0]])
        with pytest.raises(ValueError, match="in {0, 1, 2}"):
            GenotypeMatrix([[0, -1], [1, 0]])

    def test_rejects_empty_dimensions(self):
        with pytest.raises(ValueError):
            GenotypeMatrix(np.zeros((0, 3), dtype=int))
        with pytest.raises(ValueError):
            GenotypeMatrix(np.zeros((3, 0), dtype=int))

    def test_default_variant_ids(self):
        g = GenotypeMatrix([[0, 1, 2]])
        assert g.variant_ids == ("v1", "v2", "v3")

    def test_variant_id_length_checked(self):
        with pytest.raises(ValueError, match="variant ids"):
            GenotypeMatrix([[0, 1]], variant_ids=("a",))

    def test_entries_are_read_only(self):
        g = GenotypeMatrix([[0, 1], [2, 0]])
        with pytest.raises(ValueError):
            g.genotypes[0, 0] = 1


class TestPhenotype:
    def test_dichotomous_needs_both_classes(self):
        with pytest.raises(ValueError, match="at least one case"):
            Phenotype.dichotomous([1, 1, 1])
        with pytest.raises(ValueError, match="at least one case"):
            Phenotype.dichotomous([0, 0])

    def test_dichotomous_rejects_other_values(self):
        with pytest.raises(ValueError, match="0 or 1"):
            Phenotype.dichotomous([0, 1, 2])

    def test_continuous_rejects_non_finite(self):
        with pytest.raises(ValueError, match="finite"):
            Phenotype.continuous([0.0, np.inf])
        with pytest.raises(ValueError, match="finite"):
            Phenotype.continuous([0.0, np.nan])

    def test_counts(self):
        y = Phenotype.dichotomous([1, 0, 1, 0, 0])
        assert (y.n_cases, y.n_controls) == (2, 3)


class TestStratumFactor:
    def test_every_level_occupied(self):
        with pytest.raises(ValueError, match="no individuals"):
            StratumFactor([0, 0, 2])  # level 1 missing
        with pytest.raises(ValueError, match="no individuals"):
            StratumFactor([0, 0], n_levels=2)

    def test_level_indices_cover_everyone(self):
        s = StratumFactor([1, 0, 1, 2, 0])
        idx = s.level_indices()
        assert s.n_levels == 3
        assert sorted(np.concatenate(idx).tolist()) == [0, 1, 2, 3, 4]


class TestSummarizeVariants:
    def test_all_zero_matrix(self):
        s = summarize_variants(GenotypeMatrix(np.zeros((4, 2), dtype=int)))
        assert s.allele_count.tolist() == [0, 0]
        assert s.sample_maf.tolist() == [0.0, 0.0]

    def test_hand_counted_column(self):
        s = summarize_variants(GenotypeMatrix([[0], [1], [2]]))
        assert s.allele_count.tolist() == [3]
        assert s.carrier_count.tolist() == [2]
        assert s.sample_maf.tolist() == [0.5]

    def test_row_permutation_invariance(self):
        rng = np.random.default_rng(11)
        g = _random_matrix(rng)
        perm = rng.permutation(g.n_individuals)
        s1 = summarize_variants(g)
        s2 = summarize_variants(GenotypeMatrix(g.genotypes[perm]))
        assert np.array_equal(s1.allele_count, s2.allele_count)
        assert np.array_equal(s1.carrier_count, s2.carrier_count)

    def test_carrier_allele_inequalities(self):
        rng = np.random.default_rng(12)
        s = summarize_variants(_random_matrix(rng, n=40, k=8))
        assert np.all(s.carrier_count <= s.allele_count)
        assert np.all(s.allele_count <= 2 * s.carrier_count)
        assert np.all((0 <= s.sample_maf) & (s.sample_maf <= 1))


class TestFilterRare:
    def test_identity_when_all_qualify(self):
        g = GenotypeMatrix([[0, 1], [1, 0], [0, 0], [1, 1]])
        out = filter_rare(g, 0.5)
        assert np.array_equal(out.genotypes, g.genotypes)
        assert out.variant_ids == g.variant_ids

    def test_cutoff_selects_by_sample_maf(self):
        # 50 individuals: variant 1 has one allele (MAF 0.01), variant 2 has
        # twenty (MAF 0.20)
        g = np.zeros((50, 2), dtype=int)
        g[0, 0] = 1
        g[:20, 1] = 1
        out = filter_rare(GenotypeMatrix(g), 0.05)
        assert out.variant_ids == ("v1",)

    def test_monomorphic_dropped_at_any_cutoff(self):
        g = GenotypeMatrix([[1, 0], [0, 0], [1, 0]])
        out = filter_rare(g, 0.5)
        assert out.variant_ids == ("v1",)

    def test_empty_result_is_an_error(self):
        g = GenotypeMatrix(np.zeros((4, 2), dtype=int))
        with pytest.raises(NoRareVariantsError):
            filter_rare(g, 0.5)

    def test_cutoff_bounds(self):
        g = GenotypeMatrix([[1]])
        for bad in (0.0, -0.1, 0.6):
            with pytest.raises(ValueError, match="maf_cutoff"):
                filter_rare(g, bad)

    def test_commutes_with_summaries(self):
        rng = np.random.default_rng(13)
        g = _random_matrix(rng, n=30, k=6)
        cutoff = 0.3
        summary = summarize_variants(g)
        keep = (summary.sample_maf <= cutoff) & (summary.allele_count > 0)
        filtered = filter_rare(g, cutoff)
        after = summarize_variants(filtered)
        assert np.array_equal(after.allele_count, summary.allele_count[keep])
        assert np.array_equal(after.sample_maf, summary.sample_maf[keep])
