"""
Named random streams derived from the master seed.

Every source of randomness gets its own stream, keyed by a purpose and
optional ids (client, round). Streams never share state, so toggling an
attack or changing the thread count cannot shift any other draw.
"""
from enum import Enum

import numpy as np


class StreamPurpose(Enum):
    """
    Attributes:
        INIT: Shared model construction and latent initialization
        DATA: Synthetic dataset generation
        PARTITION: Client shard assignment
        PARTICIPATION: Per-round participant sampling
        CLIENT_BATCH: Minibatch draws of one client in one round
        CLIENT_ROUNDING: Stochastic rounding / QSGD of one client in one round
        SERVER_TIEBREAK: Plurality ties and signSGD majority ties
        ATTACK: Attacker selection and random payloads
        EVAL: Stochastic rounding of the evaluated quantized model
    """
    INIT = 1
    DATA = 2
    PARTITION = 3
    PARTICIPATION = 4
    CLIENT_BATCH = 5
    CLIENT_ROUNDING = 6
    SERVER_TIEBREAK = 7
    ATTACK = 8
    EVAL = 9


def stream(master_seed: int, purpose: StreamPurpose, *ids: int) -> np.random.Generator:
    """
    Generator for ``purpose`` and the given ids, a pure function of its arguments.

    Example:
        >>> a = stream(7, StreamPurpose.CLIENT_BATCH, 3, 0)
        >>> b = stream(7, StreamPurpose.CLIENT_BATCH, 3, 0)
        >>> bool(a.random() == b.random())
        True
    """
    key = (purpose.value,) + tuple(int(i) for i in ids)
    return np.random.default_rng(np.random.SeedSequence(int(master_seed), spawn_key=key))
