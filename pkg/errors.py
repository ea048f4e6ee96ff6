"""
Exception hierarchy for the lattice regression toolkit.
The CLI maps every subclass of LatticeRegressionError to exit status 1.
"""


class LatticeRegressionError(Exception):
    """Base class for all errors raised by this package."""


class NumericParseError(LatticeRegressionError, ValueError):
    """A numeric string could not be read as an exact rational."""

    def __init__(self, token: str, reason: str = "not an exact number") -> None:
        self.token = token
        super().__init__(f"cannot parse {token!r}: {reason}")


class ParameterError(LatticeRegressionError, ValueError):
    """A parameter is outside its admissible range."""


class SingularBasisError(LatticeRegressionError, ValueError):
    """The input vectors do not form a full-rank basis."""


class DimensionMismatchError(LatticeRegressionError, ValueError):
    """Observation vector and design matrix disagree in shape."""


class ContractViolationError(LatticeRegressionError, AssertionError):
    """An internal precondition was broken by the caller."""
