"""
Local optimizers for latent-weight training.

State lives only for the duration of one round's local training; the
client builds a fresh optimizer from the broadcast every round.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.errors import InvalidArgumentError
from src.federation.config import OptimizerConfig, OptimizerKind


@dataclass
class SGD:
    eta: float

    def __post_init__(self):
        if not self.eta > 0:
            raise InvalidArgumentError(f"learning rate must be positive, got {self.eta}")

    def step(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        return params - self.eta * grad


@dataclass
class Adam:
    """
    Adam with bias correction.

    Attributes:
        eta: Step size
        beta1 / beta2: Moment decay rates
        epsilon: Denominator offset
    """

    eta: float
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    _m: Optional[np.ndarray] = field(default=None, init=False, repr=False)
    _v: Optional[np.ndarray] = field(default=None, init=False, repr=False)
    _t: int = field(default=0, init=False, repr=False)

    def __post_init__(self):
        if not self.eta > 0:
            raise InvalidArgumentError(f"learning rate must be positive, got {self.eta}")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1) or not self.epsilon > 0:
            raise InvalidArgumentError("Adam needs beta1, beta2 in [0, 1) and epsilon > 0")

    def step(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        if self._m is None:
            self._m = np.zeros_like(grad)
            self._v = np.zeros_like(grad)
        self._t += 1
        self._m = self.beta1 * self._m + (1.0 - self.beta1) * grad
        self._v = self.beta2 * self._v + (1.0 - self.beta2) * grad * grad
        m_hat = self._m / (1.0 - self.beta1 ** self._t)
        v_hat = self._v / (1.0 - self.beta2 ** self._t)
        return params - self.eta * m_hat / (np.sqrt(v_hat) + self.epsilon)


def make_optimizer(config: OptimizerConfig):
    """Fresh optimizer for an ``OptimizerConfig``."""
    if config.kind is OptimizerKind.SGD:
        return SGD(config.eta)
    return Adam(config.eta, config.beta1, config.beta2, config.epsilon)
