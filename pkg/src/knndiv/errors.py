"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class CapacityError(ValueError):
    """A neighbor order exceeds the number of available points."""


class DegenerateSampleError(ValueError):
    """A zero nearest-neighbor distance makes a log-based estimator undefined."""

    def __init__(self, message, indices=()):
        super().__init__(message)
        self.indices = tuple(int(i) for i in indices)


class ModelParseError(ValueError):
    """A model spec string failed to parse."""

    def __init__(self, reason, offset):
        super().__init__(f"at offset {offset}: {reason}")
        self.reason = reason
        self.offset = int(offset)
