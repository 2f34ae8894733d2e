"""
Analytic error bound of one-shot majority voting.
"""
import math

from src.errors import DomainError, InvalidArgumentError


def one_shot_error_bound(s: float, M: int) -> float:
    """
    Upper bound [2s * exp(1 - 2s)]^(M/2) on the probability that a majority
    of M independent voters, each wrong with probability s, is wrong.

    Args:
        s: Per-voter error probability, in (0, 0.5)
        M: Number of voters

    Raises:
        DomainError: If s is outside (0, 0.5)
    """
    if not 0.0 < s < 0.5:
        raise DomainError(f"voter error probability must lie in (0, 0.5), got {s}")
    if M < 1:
        raise InvalidArgumentError(f"voter count must be positive, got {M}")
    return (2.0 * s * math.exp(1.0 - 2.0 * s)) ** (M / 2.0)
