"""Exception types shared across the package."""


class InfluMaxError(Exception):
    """Base class for all package-specific errors."""


class InvalidVertexPair(InfluMaxError):
    """An operation needed two distinct vertices but got i == j."""


class CapacityError(InfluMaxError):
    """A requested computation exceeds a documented size guard."""


class NumericalError(InfluMaxError):
    """An iterative numerical routine failed to converge or verify."""


class RegimeError(InfluMaxError):
    """An operation was called on a model in the wrong criticality regime."""


class ShapeError(InfluMaxError):
    """Vector/matrix dimensions do not match."""


class DomainError(InfluMaxError):
    """A scalar argument lies outside its mathematical domain."""


class EmptyArmsError(InfluMaxError):
    """A bandit operation was invoked with an empty arm set."""


class UnknownArmError(InfluMaxError):
    """An update targeted a vertex that is not part of the arm set."""


class AssumptionViolation(InfluMaxError):
    """A model fails the structural assumptions required by a validation."""


class ConfigError(InfluMaxError):
    """A configuration file is malformed; the message names the bad field."""
