"""Error taxonomy shared across the package.

The CLI maps these onto exit codes: configuration problems exit 1, data
problems exit 2, numerical divergence exits 3.
"""


class ReckmfError(Exception):
    """Base class for all package errors."""


class ConfigurationError(ReckmfError):
    """Invalid hyperparameter, option, or run configuration."""


class DataError(ReckmfError):
    """Invalid or inconsistent input data."""


class ParseError(DataError):
    """Malformed line in a delimited rating file."""

    def __init__(self, path, line_number, message):
        self.path = path
        self.line_number = line_number
        super().__init__(f"{path}:{line_number}: {message}")


class ScoreNotInScaleError(DataError):
    """A raw rating value does not belong to the configured score scale."""

    def __init__(self, raw_value):
        self.raw_value = raw_value
        super().__init__(f"score {raw_value!r} is not on the configured scale")


class DuplicateRatingError(DataError):
    """The same (user, item) pair was rated more than once."""


class DivergenceError(ReckmfError):
    """Training produced non-finite parameters or cost."""
