from __future__ import annotations


class StabilityError(Exception):
    exit_code = 1


class DomainError(StabilityError, ValueError):
    exit_code = 2


class BudgetExceededError(StabilityError):
    exit_code = 4


class InvariantViolation(StabilityError):
    exit_code = 3

    def __init__(self, message: str, violations: list[str] | None = None) -> None:
        super().__init__(message)
        self.violations = violations or []


class InterpolationError(InvariantViolation):
    """An interpolation error bound failed on a check grid."""


class EnvelopeSupportError(DomainError):
    """phi was requested for an eps the computed envelope does not reach."""


class InsufficientMassError(DomainError):
    def __init__(self, achieved_k: int, requested_k: int) -> None:
        super().__init__(
            f"sequence mass only supports {achieved_k} complete blocks, {requested_k} requested"
        )
        self.achieved_k = achieved_k
        self.requested_k = requested_k


class PointSetError(DomainError):
    def __init__(self, message: str, index: int | None = None) -> None:
        if index is not None:
            message = f"point {index}: {message}"
        super().__init__(message)
        self.index = index
