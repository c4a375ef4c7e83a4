"""Command-line interface: ``rvassoc test | simulate | power``.

Every randomized command takes a ``--seed`` and prints the seed it used, so
any output can be reproduced exactly; omitting the seed draws one from
system entropy. Results go to stdout as JSON (``test``, ``simulate``) or to
``--out``-prefixed TSV/JSON files (``power``, with progress on stderr).
Exit status is 0 on success and 1 on any categorized error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from .baselines import BaselineConfig
from .data import filter_rare
from .errors import (
    AscertainmentError,
    DataFormatError,
    IncompatibleMethodError,
    NoRareVariantsError,
)
from .io import (
    TEST_FORMAT_VERSION,
    default_output_paths,
    load_study,
    write_genotype_file,
    write_phenotype_file,
)
from .methods import METHOD_TAGS, STRATIFIED_METHODS, run_method
from .power import StudyGrid, run_grid
from .simulate import (
    SCENARIO_IDS,
    MafModel,
    make_scenario,
    simulate,
    with_sample_size,
)


def _entropy_seed() -> int:
    return int(np.random.SeedSequence().entropy % (2 ** 32))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rvassoc",
        description="Rare-variant association tests, cohort simulation, and power studies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    test = sub.add_parser("test", help="run one association test on genotype/phenotype files")
    test.add_argument("genotypes", help="tab-separated genotype file")
    test.add_argument("phenotypes", help="tab-separated phenotype file")
    test.add_argument("--method", required=True, choices=METHOD_TAGS)
    test.add_argument("--trait", default="auto",
                      choices=("auto", "dichotomous", "continuous"))
    test.add_argument("--maf-cutoff", type=float, default=0.05,
                      help="rare-variant MAF cutoff (default 0.05)")
    test.add_argument("--perms", type=int, default=999,
                      help="number of permutations (default 999)")
    test.add_argument("--seed", type=int, default=None)
    test.add_argument("--workers", type=int, default=1,
                      help="worker processes for permutation batches")
    test.add_argument("--cmc-cutoff", type=float, default=0.01,
                      help="collapsing MAF cutoff for the cmc method")

    sim = sub.add_parser("simulate", help="write one simulated cohort to TSV files")
    sim.add_argument("--scenario", required=True, choices=SCENARIO_IDS)
    sim.add_argument("--trait", default="dichotomous",
                     choices=("dichotomous", "continuous"))
    sim.add_argument("--n", type=int, default=None,
                     help="total cohort size (dichotomous: split equally)")
    sim.add_argument("--n-cases", type=int, default=None)
    sim.add_argument("--n-controls", type=int, default=None)
    sim.add_argument("--n-variants", type=int, default=20)
    sim.add_argument("--maf-fixed", type=float, default=None,
                     help="use this fixed MAF for every variant")
    sim.add_argument("--maf-low", type=float, default=None,
                     help="lower bound of the uniform MAF range")
    sim.add_argument("--maf-high", type=float, default=None,
                     help="upper bound of the uniform MAF range")
    sim.add_argument("--with-env", action="store_true",
                     help="draw an inert environmental factor even if the model has none")
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--out", required=True, metavar="PREFIX",
                     help="output prefix; writes PREFIX.geno.tsv and PREFIX.pheno.tsv")

    power = sub.add_parser("power", help="run a power/type-I study grid")
    power.add_argument("--scenarios", required=True,
                       help="comma-separated scenario ids (e.g. null1,s1,s3)")
    power.add_argument("--methods", required=True,
                       help=f"comma-separated method tags from: {','.join(METHOD_TAGS)}")
    power.add_argument("--sizes", required=True,
                       help="comma-separated cohort sizes (e.g. 600,1000)")
    power.add_argument("--replicates", type=int, default=200)
    power.add_argument("--perms", type=int, default=999)
    power.add_argument("--alphas", default="0.05,0.01")
    power.add_argument("--trait", default="dichotomous",
                       choices=("dichotomous", "continuous"))
    power.add_argument("--n-variants", type=int, default=20)
    power.add_argument("--seed", type=int, default=None)
    power.add_argument("--workers", type=int, default=1,
                       help="worker processes for replicates")
    power.add_argument("--out", required=True, metavar="PREFIX",
                       help="output prefix; writes PREFIX.tsv and PREFIX.json")
    return parser


def _split_list(text: str, label: str) -> list[str]:
    items = [item.strip() for item in text.split(",") if item.strip()]
    if not items:
        raise IncompatibleMethodError(f"empty {label} list")
    return items


def _cmd_test(args) -> int:
    seed = args.seed if args.seed is not None else _entropy_seed()
    g, y, strata = load_study(args.genotypes, args.phenotypes, trait=args.trait)
    g = filter_rare(g, args.maf_cutoff)
    if args.method in STRATIFIED_METHODS and strata is None:
        raise IncompatibleMethodError(
            f"method {args.method!r} needs a stratum column in the phenotype file"
        )
    result = run_method(
        args.method, g, y,
        n_permutations=args.perms,
        seed=seed,
        strata=strata,
        config=BaselineConfig(cmc_cutoff=args.cmc_cutoff),
        n_workers=args.workers,
    )
    payload = {"format_version": TEST_FORMAT_VERSION, "trait": y.trait}
    payload.update(result.to_dict())
    payload.update({
        "n_individuals": g.n_individuals,
        "n_variants_tested": g.n_variants,
        "maf_cutoff": args.maf_cutoff,
    })
    json.dump(payload, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def _maf_model_from_args(args) -> MafModel | None:
    if args.maf_fixed is not None:
        if args.maf_low is not None or args.maf_high is not None:
            raise IncompatibleMethodError("--maf-fixed excludes --maf-low/--maf-high")
        return MafModel.fixed(args.maf_fixed)
    if args.maf_low is not None or args.maf_high is not None:
        if args.maf_low is None or args.maf_high is None:
            raise IncompatibleMethodError("--maf-low and --maf-high go together")
        return MafModel.uniform(args.maf_low, args.maf_high)
    return None


def _cmd_simulate(args) -> int:
    seed = args.seed if args.seed is not None else _entropy_seed()
    spec = make_scenario(
        args.scenario, args.trait,
        n_variants=args.n_variants,
        maf_model=_maf_model_from_args(args),
        with_env=True if args.with_env else None,
    )
    if args.n is not None:
        if args.n_cases is not None or args.n_controls is not None:
            raise IncompatibleMethodError("--n excludes --n-cases/--n-controls")
        spec = with_sample_size(spec, args.n)
    elif args.n_cases is not None and args.n_controls is not None:
        if args.trait != "dichotomous":
            raise IncompatibleMethodError("case/control quotas apply to dichotomous traits")
        if args.n_cases < 1 or args.n_controls < 1:
            raise IncompatibleMethodError("case and control quotas must be positive")
        spec = replace(spec, n_cases=args.n_cases, n_controls=args.n_controls)
    else:
        raise IncompatibleMethodError("give --n, or both --n-cases and --n-controls")
    cohort = simulate(spec, seed)
    geno_path, pheno_path = default_output_paths(args.out)
    n = cohort.genotypes.n_individuals
    ids = [f"ind{j + 1}" for j in range(n)]
    write_genotype_file(geno_path, ids, cohort.genotypes)
    write_phenotype_file(pheno_path, ids, cohort.phenotype, strata=cohort.env)
    json.dump({
        "format_version": TEST_FORMAT_VERSION,
        "scenario": spec.scenario_id,
        "trait": spec.trait,
        "seed": seed,
        "n_individuals": n,
        "n_variants": cohort.genotypes.n_variants,
        "has_strata": cohort.env is not None,
        "genotype_file": geno_path,
        "phenotype_file": pheno_path,
    }, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def _cmd_power(args) -> int:
    seed = args.seed if args.seed is not None else _entropy_seed()
    scenario_ids = _split_list(args.scenarios, "scenario")
    methods = _split_list(args.methods, "method")
    try:
        sizes = [int(s) for s in _split_list(args.sizes, "size")]
        alphas = [float(a) for a in _split_list(args.alphas, "alpha")]
    except ValueError as exc:
        raise IncompatibleMethodError(f"bad numeric list: {exc}") from None
    templates = tuple(
        make_scenario(sid, args.trait, n_variants=args.n_variants)
        for sid in scenario_ids
    )
    grid = StudyGrid(
        scenarios=templates,
        methods=tuple(methods),
        sample_sizes=tuple(sizes),
        n_replicates=args.replicates,
        n_permutations=args.perms,
        alphas=tuple(alphas),
        master_seed=seed,
    )
    print(f"running {len(templates)} scenario(s) x {len(sizes)} size(s) x "
          f"{args.replicates} replicates, seed {seed}", file=sys.stderr)
    table = run_grid(grid, n_workers=args.workers,
                     progress=lambda line: print(line, file=sys.stderr))
    tsv_path, json_path = f"{args.out}.tsv", f"{args.out}.json"
    with open(tsv_path, "w", encoding="utf-8", newline="\n") as fh:
        table.write_tsv(fh)
    with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
        table.write_json(fh)
    print(f"wrote {tsv_path} and {json_path}", file=sys.stderr)
    return 0


_ERROR_CATEGORIES = (
    (DataFormatError, "data format error"),
    (NoRareVariantsError, "data error"),
    (AscertainmentError, "simulation error"),
    (IncompatibleMethodError, "invalid request"),
    (ValueError, "invalid request"),
)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"test": _cmd_test, "simulate": _cmd_simulate, "power": _cmd_power}
    try:
        return handlers[args.command](args)
    except tuple(exc for exc, _ in _ERROR_CATEGORIES) as exc:
        for exc_type, category in _ERROR_CATEGORIES:
            if isinstance(exc, exc_type):
                print(f"{category}: {exc}", file=sys.stderr)
                break
        return 1


if __name__ == "__main__":
    sys.exit(main())
