"""
Exception hierarchy shared by every package in the simulator.

Each class also derives from the builtin that callers would expect for the
same situation, so ``except ValueError`` keeps working around library calls.
"""
from typing import Iterable, List, Optional


class FedVoteError(Exception):
    """Base class for all simulator errors."""


class InvalidArgumentError(FedVoteError, ValueError):
    """An argument has the wrong shape, length or content."""


class DomainError(InvalidArgumentError):
    """A numeric argument lies outside the domain of the function."""


class DegenerateStateError(FedVoteError, ArithmeticError):
    """State that cannot be normalized (e.g. all reputations are zero)."""


class ConfigurationError(FedVoteError, ValueError):
    """
    Invalid experiment configuration.

    Carries every violation found, not just the first one.
    """

    def __init__(self, violations: Iterable[str]):
        self.violations: List[str] = list(violations) or ["invalid configuration"]
        super().__init__("; ".join(self.violations))


class IdxFormatError(FedVoteError, ValueError):
    """Malformed or truncated IDX container."""

    def __init__(self, message: str, offset: int, path: Optional[str] = None):
        self.offset = offset
        self.path = path
        location = f"{path} @ offset {offset}" if path else f"offset {offset}"
        super().__init__(f"{message} ({location})")


class PayloadFormatError(FedVoteError, ValueError):
    """Serialized payload with the wrong length or a reserved code."""
