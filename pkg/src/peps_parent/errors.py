"""Exception types shared across the package."""


class CapExceeded(ValueError):
    """A dense object would exceed the configured size cap."""


class InvariantViolation(RuntimeError):
    """A property guaranteed by construction failed numerically."""


class ConvergenceError(RuntimeError):
    """An iterative eigensolver did not reach the requested residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
