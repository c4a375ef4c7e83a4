"""Exception types shared across the package."""

from __future__ import annotations


class NoRareVariantsError(ValueError):
    """No variant survives the rare-variant MAF filter; there is nothing to test."""


class AscertainmentError(RuntimeError):
    """Case/control quotas could not be filled within the prospective draw cap."""


class IncompatibleMethodError(ValueError):
    """A test method was paired with data or a scenario it cannot run on."""


class DataFormatError(ValueError):
    """A genotype or phenotype file failed to parse.

    Carries enough context (path, line, column) to point at the offending cell.
    """

    def __init__(self, message: str, path: str | None = None,
                 line: int | None = None, column: int | None = None):
        self.path = path
        self.line = line
        self.column = column
        where = ""
        if path is not None:
            where = str(path)
            if line is not None:
                where += f":{line}"
                if column is not None:
                    where += f" (column {column})"
            where += ": "
        super().__init__(where + message)
