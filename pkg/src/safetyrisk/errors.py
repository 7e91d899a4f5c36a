"""Exception types shared across the package."""


class SafetyRiskError(Exception):
    """Base class for errors raised by safetyrisk."""


class ValidationError(SafetyRiskError, ValueError):
    """Input violates a documented precondition or file schema."""


class InsufficientSupportError(ValidationError):
    """Too few simulated pairs fall inside an escalation window."""

    def __init__(self, count: int, minimum: int):
        self.count = count
        self.minimum = minimum
        super().__init__(
            f"insufficient conditional support: {count} pairs in window "
            f"(minimum {minimum})")


class RejectionLimitError(SafetyRiskError, RuntimeError):
    """The generator kept drawing negative values."""
