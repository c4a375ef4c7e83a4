"""Tab-separated genotype and phenotype file formats.

Genotype file: first row is a header ``ID`` followed by one variant id per
column; each subsequent row is an individual id followed by its genotype
codes, each 0, 1, or 2. Phenotype file: header ``ID<TAB>phenotype`` with an
optional third column ``stratum``; one row per individual with the trait
value ({0,1} for case/control, any finite real otherwise) and, if present,
a non-negative integer stratum level.

Files written here round-trip exactly: continuous values are serialized
with ``repr`` (shortest exact float form) and parse back bit-identical.
Parsing errors carry the file, line number, and column of the offending
cell. Missing or non-numeric genotype codes are rejected outright; this
format has no missing-data convention.
"""

from __future__ import annotations

import os

import numpy as np

from .data import CONTINUOUS, DICHOTOMOUS, GenotypeMatrix, Phenotype, StratumFactor
from .errors import DataFormatError

TEST_FORMAT_VERSION = 1


def _read_rows(path) -> list[list[str]]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise DataFormatError(f"cannot read file: {exc}", path=str(path)) from exc
    if not lines:
        raise DataFormatError("file is empty", path=str(path))
    return [line.split("\t") for line in lines]


def write_genotype_file(path, individual_ids, g: GenotypeMatrix) -> None:
    ids = list(individual_ids)
    if len(ids) != g.n_individuals:
        raise ValueError("one individual id per genotype row is required")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("ID\t" + "\t".join(g.variant_ids) + "\n")
        for ind, row in zip(ids, g.genotypes):
            fh.write(str(ind) + "\t" + "\t".join(str(int(v)) for v in row) + "\n")


def read_genotype_file(path) -> tuple[tuple[str, ...], GenotypeMatrix]:
    """Parse a genotype file into (individual ids, GenotypeMatrix)."""
    rows = _read_rows(path)
    header = rows[0]
    if len(header) < 2 or header[0] != "ID":
        raise DataFormatError(
            "genotype header must be 'ID' followed by variant ids",
            path=str(path), line=1,
        )
    variant_ids = tuple(header[1:])
    n_cols = len(header)
    ids: list[str] = []
    seen: set[str] = set()
    codes = np.empty((len(rows) - 1, len(variant_ids)), dtype=np.int8)
    for li, row in enumerate(rows[1:], start=2):
        if len(row) != n_cols:
            raise DataFormatError(
                f"expected {n_cols} columns, found {len(row)}",
                path=str(path), line=li,
            )
        ind = row[0]
        if ind in seen:
            raise DataFormatError(f"duplicate individual id {ind!r}", path=str(path), line=li)
        seen.add(ind)
        ids.append(ind)
        for ci, cell in enumerate(row[1:], start=2):
            if cell not in ("0", "1", "2"):
                raise DataFormatError(
                    f"invalid genotype code {cell!r} (expected 0, 1 or 2)",
                    path=str(path), line=li, column=ci,
                )
            codes[li - 2, ci - 2] = int(cell)
    if not ids:
        raise DataFormatError("no individuals in genotype file", path=str(path), line=1)
    return tuple(ids), GenotypeMatrix(codes, variant_ids)


def write_phenotype_file(path, individual_ids, y: Phenotype,
                         strata: StratumFactor | None = None) -> None:
    ids = list(individual_ids)
    if len(ids) != y.n_individuals:
        raise ValueError("one individual id per phenotype value is required")
    if strata is not None and strata.n_individuals != y.n_individuals:
        raise ValueError("stratum factor must cover the same individuals")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("ID\tphenotype" + ("\tstratum" if strata is not None else "") + "\n")
        for j, ind in enumerate(ids):
            if y.is_dichotomous:
                value = str(int(y.values[j]))
            else:
                value = repr(float(y.values[j]))
            row = f"{ind}\t{value}"
            if strata is not None:
                row += f"\t{int(strata.levels[j])}"
            fh.write(row + "\n")


def read_phenotype_file(path) -> tuple[tuple[str, ...], np.ndarray, np.ndarray | None]:
    """Parse a phenotype file into (ids, values, stratum levels or None)."""
    rows = _read_rows(path)
    header = rows[0]
    if len(header) not in (2, 3) or header[0] != "ID":
        raise DataFormatError(
            "phenotype header must be 'ID<TAB>phenotype' with optional '<TAB>stratum'",
            path=str(path), line=1,
        )
    has_strata = len(header) == 3
    ids: list[str] = []
    seen: set[str] = set()
    values: list[float] = []
    levels: list[int] = []
    for li, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DataFormatError(
                f"expected {len(header)} columns, found {len(row)}",
                path=str(path), line=li,
            )
        ind = row[0]
        if ind in seen:
            raise DataFormatError(f"duplicate individual id {ind!r}", path=str(path), line=li)
        seen.add(ind)
        ids.append(ind)
        try:
            value = float(row[1])
        except ValueError:
            raise DataFormatError(
                f"invalid phenotype value {row[1]!r}", path=str(path), line=li, column=2,
            ) from None
        if not np.isfinite(value):
            raise DataFormatError(
                f"non-finite phenotype value {row[1]!r}", path=str(path), line=li, column=2,
            )
        values.append(value)
        if has_strata:
            if not row[2].isdigit():
                raise DataFormatError(
                    f"invalid stratum level {row[2]!r} (expected a non-negative integer)",
                    path=str(path), line=li, column=3,
                )
            levels.append(int(row[2]))
    if not ids:
        raise DataFormatError("no individuals in phenotype file", path=str(path), line=1)
    strata = np.asarray(levels, dtype=np.int64) if has_strata else None
    return tuple(ids), np.asarray(values, dtype=np.float64), strata


def load_study(genotype_path, phenotype_path, trait: str = "auto"):
    """Load and align a genotype/phenotype file pair.

    Phenotype rows are matched to genotype rows by individual id (order in
    the phenotype file is free); every genotype id must appear exactly once.
    ``trait='auto'`` treats a {0,1}-valued phenotype as dichotomous.

    Returns
    -------
    (GenotypeMatrix, Phenotype, StratumFactor or None)
    """
    geno_ids, g = read_genotype_file(genotype_path)
    pheno_ids, values, levels = read_phenotype_file(phenotype_path)
    index = {ind: j for j, ind in enumerate(pheno_ids)}
    missing = [ind for ind in geno_ids if ind not in index]
    if missing:
        raise DataFormatError(
            f"phenotype file lacks {len(missing)} genotyped individual(s), "
            f"first missing: {missing[0]!r}",
            path=str(phenotype_path),
        )
    extra = set(pheno_ids) - set(geno_ids)
    if extra:
        raise DataFormatError(
            f"phenotype file has {len(extra)} individual(s) not in the genotype file, "
            f"e.g. {sorted(extra)[0]!r}",
            path=str(phenotype_path),
        )
    order = np.array([index[ind] for ind in geno_ids])
    values = values[order]
    if trait == "auto":
        trait = DICHOTOMOUS if np.all((values == 0.0) | (values == 1.0)) else CONTINUOUS
    if trait == DICHOTOMOUS and not np.all((values == 0.0) | (values == 1.0)):
        raise DataFormatError(
            "dichotomous trait requested but phenotype values are not all 0/1",
            path=str(phenotype_path),
        )
    y = Phenotype(values, trait)
    strata = StratumFactor(levels[order]) if levels is not None else None
    return g, y, strata


def default_output_paths(prefix) -> tuple[str, str]:
    """Genotype/phenotype file names for a simulation output prefix."""
    prefix = os.fspath(prefix)
    return f"{prefix}.geno.tsv", f"{prefix}.pheno.tsv"
