"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid or unsatisfiable configuration (e.g. metadata exceeds capacity)."""


class TraceError(ValueError):
    """Malformed trace input."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InvariantViolation(RuntimeError):
    """An internal invariant failed during simulation (budget, hit-ratio cap)."""
