"""Exception hierarchy.

Every error carries a short machine-readable ``reason`` code; the CLI maps
:class:`ValidationError` to exit status 1 and :class:`ComputationError` to 2.
"""


class CmncError(Exception):
    reason = "error"

    def __init__(self, message: str = "", *, reason: str | None = None):
        super().__init__(message)
        if reason is not None:
            self.reason = reason


class ValidationError(CmncError, ValueError):
    reason = "invalid-input"


class DiscriminantError(ValidationError):
    reason = "invalid-discriminant"


class HypothesisNotMet(ValidationError):
    reason = "hypothesis-not-met"


class TableTooSmall(ValidationError):
    reason = "table-too-small"

    def __init__(self, required: int, actual: int):
        super().__init__(f"sieve table limit {actual} is below the required {required}")
        self.required = required
        self.actual = actual


class DomainError(ValidationError):
    reason = "not-in-fundamental-domain"


class ZeroNorm(ValidationError):
    reason = "zero-norm"


class SameModulus(ValidationError):
    reason = "same-modulus"


class ComputationError(CmncError, ArithmeticError):
    reason = "computation-error"


class UndecidableBoundary(ComputationError):
    reason = "undecidable-boundary"


class PrecisionExhausted(ComputationError):
    reason = "precision-escalation-exhausted"


class CorruptCacheEntry(ComputationError):
    reason = "corrupt-cache-entry"
