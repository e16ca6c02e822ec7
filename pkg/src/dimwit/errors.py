"""Exception types shared across the package."""


class DimwitError(Exception):
    """Base class for all library errors."""


class ShapeError(DimwitError):
    """Array dimensions do not match the declared scenario or matrix shape."""


class UnsupportedScenarioError(DimwitError):
    """Operation requires a scenario shape it was not given."""


class WrongModeError(DimwitError):
    """Exact arithmetic requested on float data."""


class NotADistributionError(DimwitError):
    """Weights or tables fail nonnegativity or normalization."""


class InvalidBehaviourError(DimwitError):
    """Behaviour failed validation where a valid one is required."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class SignalingBehaviourError(InvalidBehaviourError):
    """Bell behaviour signals, so the rank witness derivation does not apply."""


class CapExceededError(DimwitError):
    """Requested enumeration is larger than the configured cap."""

    def __init__(self, required, cap):
        super().__init__(f"enumeration needs {required} items, cap is {cap}")
        self.required = required
        self.cap = cap


class LPSolverError(DimwitError):
    """LP backend failed in a way that is not an infeasibility verdict."""


class StrategyError(DimwitError):
    """Strategy operators violate stochasticity, PSD, or completeness invariants."""


class FormatError(DimwitError):
    """Malformed JSON document: bad shape, mixed scalar forms, or unknown kind."""
