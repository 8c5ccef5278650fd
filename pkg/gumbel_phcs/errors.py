"""Licensed under The MIT License (MIT) - Copyright (c) 2023-present the gumbel-phcs authors. See LICENSE"""

from __future__ import annotations

__all__ = (
    "GumbelPHCSException",
    "DomainError",
    "InvalidPlan",
    "EvaluationError",
    "EstimationError",
    "DataError",
    "ConfigError",
)


class GumbelPHCSException(Exception):
    """Base exception class for gumbel-phcs.

    Ideally speaking, this could be caught to handle any exceptions raised from this library.
    """


class DomainError(GumbelPHCSException, ValueError):
    """Raised when an argument lies outside the support of the function it was passed to."""


class InvalidPlan(GumbelPHCSException, ValueError):
    """Raised when a censoring plan or a removal scheme violates its invariants."""


class EvaluationError(GumbelPHCSException, ArithmeticError):
    """Raised when an objective evaluates to a nonfinite value on degenerate inputs."""


class EstimationError(GumbelPHCSException):
    """Raised when an estimate is required but cannot be produced.

    This covers singular information matrices, too many failed bootstrap refits and chains that are
    too short for the requested summary.
    """


class DataError(GumbelPHCSException):
    """Raised when a data file cannot be parsed.

    Attributes
    ----------
    line
        The 1-based line number the problem was found on, ``None`` when the file as a whole is at fault.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class ConfigError(GumbelPHCSException):
    """Raised when a run configuration is invalid."""
