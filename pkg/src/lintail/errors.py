"""Exception types raised by the estimator and the data layer.

Estimation errors derive from :class:`EstimationError`, file and format
problems from :class:`DataError`.  The CLI maps each family to a distinct
exit code (see ``lintail.cli``), so keeping the split clean matters more
than it looks.
"""

__all__ = [
    "LintailError",
    "EstimationError",
    "DegenerateDesign",
    "InsufficientSuffix",
    "NoCandidates",
    "DataError",
    "MissingColumn",
    "ParseError",
    "TooFewRows",
    "ConfigError",
]


class LintailError(Exception):
    """Base class for every error this package raises on purpose."""


class EstimationError(LintailError):
    """Base class for failures of the estimation routines."""


class DegenerateDesign(EstimationError):
    """All covariate values in the requested suffix are (numerically) equal.

    A least-squares line needs spread in x; rather than dividing by a
    vanishing variance and returning NaN we refuse.
    """


class InsufficientSuffix(EstimationError):
    """Fewer observations above the cut than the minimum suffix size."""


class NoCandidates(EstimationError):
    """The candidate filter left fewer than two admissible thresholds."""


class DataError(LintailError):
    """Base class for dataset ingestion problems."""


class MissingColumn(DataError):
    """A requested column name is absent from the CSV header."""

    def __init__(self, column, path):
        self.column = column
        self.path = path
        super().__init__(f"column {column!r} not found in header of {path}")


class ParseError(DataError):
    """A cell could not be parsed as a finite number.

    ``row`` is the 1-based line number in the file (the header is line 1),
    ``column`` the offending column name.
    """

    def __init__(self, row, column, value, path):
        self.row = row
        self.column = column
        self.value = value
        self.path = path
        super().__init__(
            f"{path}:{row}: cannot parse {value!r} in column {column!r} as a number"
        )


class TooFewRows(DataError):
    """Fewer complete rows than the minimum after missing-data filtering."""

    def __init__(self, n_complete, minimum, path=None):
        self.n_complete = n_complete
        self.minimum = minimum
        self.path = path
        where = f" in {path}" if path else ""
        super().__init__(
            f"only {n_complete} complete rows{where}, need at least {minimum}"
        )


class ConfigError(LintailError):
    """A scenario configuration file is malformed or inconsistent."""
