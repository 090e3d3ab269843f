"""Exception hierarchy shared by the library modules and the CLI."""

from typing import Any, Dict, Optional


class SplineWeightsError(ValueError):
    """Base error. `category` and `exit_code` drive the CLI error payload."""

    category = "numerical"
    exit_code = 4

    def to_payload(self) -> Dict[str, Any]:
        return {"success": False, "category": self.category, "error": str(self)}


# Configuration

class ConfigError(SplineWeightsError):
    category = "config"
    exit_code = 2


class LagError(ConfigError):
    """Lag L outside 1 <= L < n."""


# Ingestion

class IngestionError(SplineWeightsError):
    category = "ingestion"
    exit_code = 3

    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InsufficientDataError(IngestionError):
    pass


# Numerical

class NumericalError(SplineWeightsError):
    category = "numerical"
    exit_code = 4


class DimensionError(NumericalError):
    pass


class DomainError(NumericalError):
    pass


class SingularityError(NumericalError):
    category = "singularity"

    def __init__(self, message: str, level: Optional[int] = None):
        if level is not None:
            message = f"level l={level}: {message}"
        super().__init__(message)
        self.level = level


class NotCorrelatedError(NumericalError):
    """Row j is not correlated with the constant trend (j not in I(l))."""

    def __init__(self, level: int, row: int):
        super().__init__(f"row {row} at level l={level} is not in the index set I(l)")
        self.level = level
        self.row = row


# Warnings

class ConditioningWarning(UserWarning):
    """LU pivots indicate a condition estimate above 1e12."""


class ThresholdWarning(UserWarning):
    """A trend product lies within 10x of the I(l) zero threshold."""
