"""Cohort simulation: genotypes, covariates, environment, and phenotypes.

Genotypes are independent rare-variant sites in Hardy-Weinberg equilibrium:
each variant gets a MAF drawn once per cohort (uniform on a range, or a
fixed value), and each individual's count at that site is binomial(2, MAF).

The scenario catalog covers ten phenotype models, addressable by id:

==========  ===========================================================
null1       no genetic, environmental, or interaction effect
null2       environmental main effect only (dichotomous only)
s1          5 risk variants, constant effect size
s2          5 risk variants, effect size growing as MAF shrinks
s3          5 risk + 5 protective variants, MAF-scaled effects
s4          5 x 5 variant-pair interactions, alternating sign (MAF 0.01)
s5          6 x 9 variant-pair interactions, alternating sign (MAF 0.01)
s6          weak mixed marginal effects plus the s5 interaction block
s7          environmental main effect + positive GxE (dichotomous only)
s8          environmental main effect + mixed-sign GxE (dichotomous only)
==========  ===========================================================

Dichotomous phenotypes come from a logistic model with baseline log-odds
``log(1/99)`` (1% baseline penetrance): risk variants multiply the odds by
3 (constant-effect model) or by ``5^(|log10 MAF| / 4)``; a pair interaction
multiplies the odds by 5 with sign alternating over the first index; an
environmental exposure doubles the odds; GxE terms apply the MAF-scaled
coefficient only in the exposed stratum. Case/control quotas are filled by
rejection sampling: individuals are drawn prospectively from the population
model and banked by affection status until both quotas are met, which
preserves the penetrance model under the case-control design.

Continuous phenotypes are ``y = 0.5*U1 + 0.5*U2 + genetic shift + noise``
with ``U1 ~ N(0,1)``, ``U2 ~ Bernoulli(0.5)``, ``noise ~ N(0,1)``; the
genetic shift uses 0.8 per allele (constant), ``0.4 * |log10 MAF|``
(MAF-scaled), or 1.5 per active pair with the same alternating sign.

Determinism: a cohort is a pure function of (spec, seed). Genotypes,
environment, covariates, and affection/noise draws come from separate
child streams of the seed, so e.g. requesting an (inert) environmental
factor under null1 does not change the genotypes or phenotype drawn.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy.special import expit

from .data import DICHOTOMOUS, CONTINUOUS, GenotypeMatrix, Phenotype, StratumFactor
from .errors import AscertainmentError

BASELINE_LOG_ODDS = math.log(1.0 / 99.0)
ENV_LOG_ODDS = math.log(2.0)
PAIR_LOG_ODDS = math.log(5.0)
CONSTANT_LOG_ODDS = math.log(3.0)
MAF_LOG_ODDS_SCALE = math.log(5.0) / 4.0
PAIR_SHIFT = 1.5
CONSTANT_SHIFT = 0.8
MAF_SHIFT_SCALE = 0.4

_BATCH = 8192

SCENARIO_IDS = ("null1", "null2", "s1", "s2", "s3", "s4", "s5", "s6", "s7", "s8")
DICHOTOMOUS_ONLY = ("null2", "s7", "s8")


@dataclass(frozen=True)
class MafModel:
    """Per-variant MAF distribution: uniform on [low, high] or a fixed value."""

    kind: str
    low: float
    high: float

    def __post_init__(self):
        if self.kind not in ("uniform", "fixed"):
            raise ValueError(f"unknown MAF model kind {self.kind!r}")
        if not (0.0 < self.low <= self.high <= 0.5):
            raise ValueError("MAF bounds must satisfy 0 < low <= high <= 0.5")

    @classmethod
    def uniform(cls, low: float = 1e-4, high: float = 1e-2) -> "MafModel":
        return cls("uniform", low, high)

    @classmethod
    def fixed(cls, value: float = 0.01) -> "MafModel":
        return cls("fixed", value, value)

    def draw(self, rng: np.random.Generator, k: int) -> np.ndarray:
        if self.kind == "fixed":
            return np.full(k, self.low)
        return rng.uniform(self.low, self.high, size=k)


class Covariates(NamedTuple):
    u1: np.ndarray
    u2: np.ndarray


@dataclass(frozen=True)
class ScenarioSpec:
    """A fully resolved phenotype model plus sampling targets.

    Index tuples are 0-based variant positions. ``pair_signs`` aligns with
    ``pair_rows`` and alternates over the 1-based row position (first row
    negative). ``marginal_scale`` multiplies the whole marginal sum (used by
    the mixed-effect model). ``draw_env`` controls whether a Bernoulli(0.5)
    exposure is drawn at all; it may be on even when ``env_in_model`` is off,
    yielding an inert factor for stratified-test nulls.
    """

    scenario_id: str
    trait: str
    n_variants: int = 20
    maf_model: MafModel = MafModel.uniform()
    marginal_plus: tuple[int, ...] = ()
    marginal_minus: tuple[int, ...] = ()
    marginal_coef: str = "constant"  # "constant" | "maf"
    marginal_scale: float = 1.0
    pair_rows: tuple[int, ...] = ()
    pair_cols: tuple[int, ...] = ()
    pair_signs: tuple[int, ...] = ()
    env_in_model: bool = False
    draw_env: bool = False
    gxe_plus: tuple[int, ...] = ()
    gxe_minus: tuple[int, ...] = ()
    n_cases: int | None = None
    n_controls: int | None = None
    n_total: int | None = None
    attempt_cap: int = 10_000_000

    def __post_init__(self):
        if self.trait not in (DICHOTOMOUS, CONTINUOUS):
            raise ValueError(f"unknown trait kind {self.trait!r}")
        if self.n_variants < 1:
            raise ValueError("n_variants must be positive")
        used = (self.marginal_plus + self.marginal_minus + self.pair_rows
                + self.pair_cols + self.gxe_plus + self.gxe_minus)
        if used and max(used) >= self.n_variants:
            raise ValueError(
                f"scenario {self.scenario_id!r} uses variant index {max(used)} "
                f"but only {self.n_variants} variants are simulated"
            )
        if len(self.pair_signs) != len(self.pair_rows):
            raise ValueError("pair_signs must align with pair_rows")
        if self.env_in_model and not self.draw_env:
            raise ValueError("a model with environmental terms must draw the factor")


def _alternating_signs(rows: tuple[int, ...]) -> tuple[int, ...]:
    # (-1)^position with 1-based positions: first interacting variant protective
    return tuple(-1 if (r + 1) % 2 == 1 else 1 for r in rows)


_CATALOG: dict[str, dict] = {
    "null1": {},
    "null2": {"env_in_model": True},
    "s1": {"marginal_plus": tuple(range(5)), "marginal_coef": "constant"},
    "s2": {"marginal_plus": tuple(range(5)), "marginal_coef": "maf"},
    "s3": {
        "marginal_plus": tuple(range(5)),
        "marginal_minus": tuple(range(5, 10)),
        "marginal_coef": "maf",
    },
    "s4": {"pair_rows": tuple(range(5)), "pair_cols": tuple(range(5, 10)), "fixed_maf": True},
    "s5": {"pair_rows": tuple(range(6)), "pair_cols": tuple(range(6, 15)), "fixed_maf": True},
    "s6": {
        "marginal_plus": tuple(range(2)),
        "marginal_minus": tuple(range(2, 5)),
        "marginal_coef": "maf",
        "marginal_scale": 0.1,
        "pair_rows": tuple(range(6)),
        "pair_cols": tuple(range(6, 15)),
    },
    "s7": {"env_in_model": True, "gxe_plus": tuple(range(5))},
    "s8": {
        "env_in_model": True,
        "gxe_plus": tuple(range(5)),
        "gxe_minus": tuple(range(5, 10)),
    },
}


def make_scenario(
    scenario_id: str,
    trait: str,
    *,
    n_cases: int | None = None,
    n_controls: int | None = None,
    n_total: int | None = None,
    n_variants: int = 20,
    maf_model: MafModel | None = None,
    with_env: bool | None = None,
) -> ScenarioSpec:
    """Build a catalog scenario, optionally overriding sample size, variant
    count, MAF model, or (for scenarios without environmental terms) whether
    an inert exposure factor is drawn alongside the cohort.

    Sample-size fields may be left unset to produce a template for a power
    grid, which fills them per grid cell.
    """
    scenario_id = scenario_id.lower()
    if scenario_id not in _CATALOG:
        raise ValueError(
            f"unknown scenario {scenario_id!r}; expected one of {', '.join(SCENARIO_IDS)}"
        )
    if trait == CONTINUOUS and scenario_id in DICHOTOMOUS_ONLY:
        raise ValueError(f"scenario {scenario_id!r} is defined for dichotomous traits only")
    entry = dict(_CATALOG[scenario_id])
    fixed_maf = entry.pop("fixed_maf", False)
    if maf_model is None:
        maf_model = MafModel.fixed(0.01) if fixed_maf else MafModel.uniform()
    elif fixed_maf and maf_model.kind != "fixed":
        raise ValueError(f"scenario {scenario_id!r} requires a fixed-MAF model")
    env_in_model = entry.get("env_in_model", False)
    if with_env is None:
        draw_env = env_in_model
    elif not with_env and env_in_model:
        raise ValueError(f"scenario {scenario_id!r} cannot drop its environmental factor")
    else:
        draw_env = with_env
    pair_rows = entry.get("pair_rows", ())
    return ScenarioSpec(
        scenario_id=scenario_id,
        trait=trait,
        n_variants=n_variants,
        maf_model=maf_model,
        pair_signs=_alternating_signs(pair_rows),
        draw_env=draw_env,
        n_cases=n_cases,
        n_controls=n_controls,
        n_total=n_total,
        **entry,
    )


def with_sample_size(spec: ScenarioSpec, n: int) -> ScenarioSpec:
    """Fill a template's sampling targets for a total cohort size ``n``.

    Dichotomous cohorts use equal case and control quotas, so ``n`` must be
    even.
    """
    if spec.trait == DICHOTOMOUS:
        if n % 2 != 0:
            raise ValueError(f"dichotomous cohorts split evenly; got odd size {n}")
        return replace(spec, n_cases=n // 2, n_controls=n // 2, n_total=None)
    return replace(spec, n_total=n, n_cases=None, n_controls=None)


@dataclass(frozen=True)
class SimulatedCohort:
    """One simulated dataset plus the generating MAFs and draw count."""

    genotypes: GenotypeMatrix
    phenotype: Phenotype
    env: StratumFactor | None
    covariates: Covariates | None
    true_maf: np.ndarray
    n_prospective_draws: int = 0


def _marginal_betas(spec: ScenarioSpec, maf: np.ndarray) -> np.ndarray:
    if spec.marginal_coef == "constant":
        const = CONSTANT_LOG_ODDS if spec.trait == DICHOTOMOUS else CONSTANT_SHIFT
        return np.full(spec.n_variants, const)
    scale = MAF_LOG_ODDS_SCALE if spec.trait == DICHOTOMOUS else MAF_SHIFT_SCALE
    return scale * np.abs(np.log10(maf))


def _gxe_betas(maf: np.ndarray) -> np.ndarray:
    return MAF_LOG_ODDS_SCALE * np.abs(np.log10(maf))


def _phenotype_shift(
    spec: ScenarioSpec,
    genotypes: np.ndarray,
    env: np.ndarray | None,
    maf: np.ndarray,
) -> np.ndarray:
    """Genetic plus environmental contribution to the linear predictor."""
    x = genotypes.astype(np.float64)
    shift = np.zeros(x.shape[0])
    if spec.marginal_plus or spec.marginal_minus:
        beta = _marginal_betas(spec, maf)
        total = np.zeros(x.shape[0])
        if spec.marginal_plus:
            plus = list(spec.marginal_plus)
            total += x[:, plus] @ beta[plus]
        if spec.marginal_minus:
            minus = list(spec.marginal_minus)
            total -= x[:, minus] @ beta[minus]
        shift += spec.marginal_scale * total
    if spec.pair_rows:
        coef = PAIR_LOG_ODDS if spec.trait == DICHOTOMOUS else PAIR_SHIFT
        carrier = x > 0
        # sum_{r,c} sign_r * 1(carrier_r) * 1(carrier_c) factorizes because
        # the sign depends on the row index only and rows/cols are disjoint
        signed_rows = carrier[:, list(spec.pair_rows)] @ np.asarray(spec.pair_signs, dtype=np.float64)
        col_counts = carrier[:, list(spec.pair_cols)].sum(axis=1)
        shift += coef * signed_rows * col_counts
    if spec.env_in_model:
        e = env.astype(np.float64)
        shift += ENV_LOG_ODDS * e
        if spec.gxe_plus or spec.gxe_minus:
            beta = _gxe_betas(maf)
            gxe = np.zeros(x.shape[0])
            if spec.gxe_plus:
                gxe += x[:, list(spec.gxe_plus)] @ beta[list(spec.gxe_plus)]
            if spec.gxe_minus:
                gxe -= x[:, list(spec.gxe_minus)] @ beta[list(spec.gxe_minus)]
            shift += e * gxe
    return shift


def draw_genotypes(
    spec: ScenarioSpec, seed: int, n_individuals: int | None = None
) -> tuple[GenotypeMatrix, np.ndarray]:
    """Draw a genotype matrix and its generating MAFs, with no phenotype.

    ``n_individuals`` defaults to the spec's sampling target.
    """
    if n_individuals is None:
        n_individuals = spec.n_total
        if n_individuals is None and spec.n_cases is not None:
            n_individuals = spec.n_cases + (spec.n_controls or 0)
    if n_individuals is None or n_individuals < 1:
        raise ValueError("n_individuals must be set, either on the spec or explicitly")
    maf_rng, geno_rng = (np.random.default_rng(s)
                         for s in np.random.SeedSequence(seed).spawn(2))
    maf = spec.maf_model.draw(maf_rng, spec.n_variants)
    genotypes = geno_rng.binomial(2, maf, size=(n_individuals, spec.n_variants))
    return GenotypeMatrix(genotypes.astype(np.int8)), maf


def simulate_dichotomous(spec: ScenarioSpec, seed: int) -> SimulatedCohort:
    """Simulate an ascertained case-control cohort for a dichotomous scenario.

    Prospective individuals are drawn from the population model in batches
    and banked by affection status until the case and control quotas are
    both met (cases first in the returned row order). Raises
    :class:`AscertainmentError` if the quotas cannot be filled within
    ``spec.attempt_cap`` prospective draws.
    """
    if spec.trait != DICHOTOMOUS:
        raise ValueError(f"scenario {spec.scenario_id!r} spec is for a continuous trait")
    if not spec.n_cases or not spec.n_controls:
        raise ValueError("n_cases and n_controls must be positive for ascertainment")
    ss = np.random.SeedSequence(seed)
    maf_rng, geno_rng, env_rng, status_rng = (np.random.default_rng(s) for s in ss.spawn(4))
    maf = spec.maf_model.draw(maf_rng, spec.n_variants)

    case_geno, ctrl_geno = [], []
    case_env, ctrl_env = [], []
    need_cases, need_controls = spec.n_cases, spec.n_controls
    drawn = 0
    while need_cases > 0 or need_controls > 0:
        if drawn >= spec.attempt_cap:
            raise AscertainmentError(
                f"scenario {spec.scenario_id!r}: failed to bank "
                f"{spec.n_cases} cases / {spec.n_controls} controls "
                f"within {spec.attempt_cap} prospective draws"
            )
        batch = min(_BATCH, spec.attempt_cap - drawn)
        genotypes = geno_rng.binomial(2, maf, size=(batch, spec.n_variants)).astype(np.int8)
        env = env_rng.integers(0, 2, size=batch) if spec.draw_env else None
        prob = expit(BASELINE_LOG_ODDS + _phenotype_shift(spec, genotypes, env, maf))
        is_case = status_rng.random(batch) < prob

        case_idx = np.flatnonzero(is_case)
        ctrl_idx = np.flatnonzero(~is_case)
        take_cases = case_idx[:need_cases]
        take_controls = ctrl_idx[:need_controls]
        # count draws only up to the point the last quota fills
        if take_cases.size >= need_cases and take_controls.size >= need_controls:
            last_case = take_cases[-1] if need_cases else -1
            last_ctrl = take_controls[-1] if need_controls else -1
            drawn += int(max(last_case, last_ctrl)) + 1
        else:
            drawn += batch
        if take_cases.size:
            case_geno.append(genotypes[take_cases])
            if env is not None:
                case_env.append(env[take_cases])
        if take_controls.size:
            ctrl_geno.append(genotypes[take_controls])
            if env is not None:
                ctrl_env.append(env[take_controls])
        need_cases -= take_cases.size
        need_controls -= take_controls.size

    genotypes = np.vstack(case_geno + ctrl_geno)
    labels = np.concatenate(
        [np.ones(spec.n_cases), np.zeros(spec.n_controls)]
    )
    env_factor = None
    if spec.draw_env:
        env_all = np.concatenate(case_env + ctrl_env)
        env_factor = StratumFactor(env_all, n_levels=2)
    return SimulatedCohort(
        genotypes=GenotypeMatrix(genotypes),
        phenotype=Phenotype.dichotomous(labels),
        env=env_factor,
        covariates=None,
        true_maf=maf,
        n_prospective_draws=drawn,
    )


def simulate_continuous(spec: ScenarioSpec, seed: int) -> SimulatedCohort:
    """Simulate a quantitative-trait cohort for a continuous scenario."""
    if spec.trait != CONTINUOUS:
        raise ValueError(f"scenario {spec.scenario_id!r} spec is for a dichotomous trait")
    if not spec.n_total:
        raise ValueError("n_total must be positive for a continuous cohort")
    n = spec.n_total
    ss = np.random.SeedSequence(seed)
    maf_rng, geno_rng, env_rng, covar_rng, noise_rng = (
        np.random.default_rng(s) for s in ss.spawn(5)
    )
    maf = spec.maf_model.draw(maf_rng, spec.n_variants)
    genotypes = geno_rng.binomial(2, maf, size=(n, spec.n_variants)).astype(np.int8)
    env = env_rng.integers(0, 2, size=n) if spec.draw_env else None
    u1 = covar_rng.standard_normal(n)
    u2 = covar_rng.integers(0, 2, size=n).astype(np.float64)
    y = (
        0.5 * u1
        + 0.5 * u2
        + _phenotype_shift(spec, genotypes, env, maf)
        + noise_rng.standard_normal(n)
    )
    return SimulatedCohort(
        genotypes=GenotypeMatrix(genotypes),
        phenotype=Phenotype.continuous(y),
        env=StratumFactor(env, n_levels=2) if env is not None else None,
        covariates=Covariates(u1, u2),
        true_maf=maf,
        n_prospective_draws=n,
    )


def simulate(spec: ScenarioSpec, seed: int) -> SimulatedCohort:
    """Simulate one cohort, dispatching on the spec's trait kind."""
    if spec.trait == DICHOTOMOUS:
        return simulate_dichotomous(spec, seed)
    return simulate_continuous(spec, seed)
