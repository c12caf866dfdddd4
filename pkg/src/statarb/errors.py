"""Shared error vocabulary for the statarb package.

Every domain failure raises one of these so callers (and the CLI) can map
failures to exit codes without string matching.
"""
from __future__ import annotations


class StatarbError(Exception):
    """Base class for all domain errors raised by this package."""


class DegenerateModel(StatarbError):
    """A lattice model violates a non-degeneracy requirement (zero divisor,
    vanishing normalizer, non-positive martingale weights, ...)."""


class NoSaExists(StatarbError):
    """No statistical arbitrage exists for the given model (q equals the
    critical ratio), so no strategy can be solved for."""


class NoSolution(StatarbError):
    """A constrained linear system has no admissible (nonnegative) solution."""


class InvalidBase(StatarbError):
    """A base strategy has negative first-scenario gain, so no third-period
    position bound interval exists."""


class InvalidInterval(StatarbError):
    """Barrier interval ordering a < s0 < b is violated."""


class DegenerateSeries(StatarbError):
    """A price series is too short or has zero variance, so GBM parameters
    cannot be estimated."""


class EmptySample(StatarbError):
    """Metrics were requested on an empty sample."""


class AllRunsSkipped(StatarbError):
    """Every run in an experiment was voided by the strategy precondition."""


class ParseError(StatarbError):
    """A CSV/JSON input failed to parse; carries the offending line number."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class NonMonotoneDates(StatarbError):
    """Market-series dates are not strictly increasing."""


class InsufficientData(StatarbError):
    """A market series is too short for the requested estimation window."""
