"""Shared exception types."""


class FedGateError(Exception):
    """Base class for all fedgate errors."""


class ValidationError(FedGateError):
    """An input or invariant check failed."""
