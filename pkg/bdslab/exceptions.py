"""
Exception hierarchy for the lab.

Every error carries the process exit code the CLI reports for it.
"""


class BDSLabError(Exception):
    """Base class for all lab errors."""

    exit_code: int = 1


class ParameterError(BDSLabError, ValueError):
    """A numeric input is outside its valid range."""

    exit_code = 1


class DegenerateInputError(ParameterError):
    """Input for which the quantity is undefined (no trade, zero denominator)."""


class InfeasibleScenarioError(BDSLabError):
    """The scenario violates the chain p <= tau*alpha < beta < 0.5."""

    exit_code = 2

    def __init__(self, message: str, inequality: str = ""):
        super().__init__(message)
        self.inequality = inequality


class InfeasiblePriceError(InfeasibleScenarioError):
    """A fixed trade price lies outside [0, C1 bound]."""


class CapacityError(BDSLabError):
    """Exhaustive enumeration requested beyond the configured bound."""

    exit_code = 3
