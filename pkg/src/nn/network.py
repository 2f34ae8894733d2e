"""
Dense feedforward network with weights passed in flat, normalized form.

This module provides:
- LayerShape / LatentWeights: the flat trainable vector and its layout
- Model: layer sizes, activation, static batch norm flag and the frozen
  floating-point final layer
- Batch: a labelled minibatch
- forward / loss_and_grad_normalized: inference and manual backprop
- static_batch_norm, latent_gradient and accuracy helpers

Weight matrices act as ``y = x @ W`` (rows = fan-in, cols = fan-out) and
are flattened layer-major, row-major.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from src.errors import InvalidArgumentError
from src.nn.normalization import NormalizationFn

logger = logging.getLogger(__name__)

DEFAULT_BN_EPSILON = 1e-5


class Activation(Enum):
    """
    Hidden-layer activation.

    Attributes:
        RELU: max(0, x)
        TANH: tanh(x)
    """
    RELU = "relu"
    TANH = "tanh"


class LayerShape(NamedTuple):
    layer: int
    rows: int
    cols: int

    @property
    def size(self) -> int:
        return self.rows * self.cols


# =============================================================================
# Weight containers
# =============================================================================

@dataclass
class LatentWeights:
    """
    Flat latent weight vector h plus the layout it was flattened from.

    Attributes:
        values: Real vector of length d
        shapes: Ordered layer shapes; their sizes sum to d
    """

    values: np.ndarray
    shapes: Tuple[LayerShape, ...]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).ravel()
        self.shapes = tuple(LayerShape(*s) for s in self.shapes)
        if sum(s.size for s in self.shapes) != self.values.size:
            raise InvalidArgumentError(
                f"latent weights: {self.values.size} values do not match layer shapes "
                f"totalling {sum(s.size for s in self.shapes)}"
            )
        if not np.all(np.isfinite(self.values)):
            raise InvalidArgumentError("latent weights must be finite")

    @property
    def d(self) -> int:
        return int(self.values.size)

    def matrices(self) -> List[np.ndarray]:
        return split_layers(self.values, self.shapes)

    @classmethod
    def from_matrices(cls, matrices: Sequence[np.ndarray]) -> "LatentWeights":
        shapes = tuple(LayerShape(i, m.shape[0], m.shape[1]) for i, m in enumerate(matrices))
        values = np.concatenate([np.asarray(m, dtype=float).ravel() for m in matrices])
        return cls(values=values, shapes=shapes)

    def copy(self) -> "LatentWeights":
        return LatentWeights(values=self.values.copy(), shapes=self.shapes)


def split_layers(flat: np.ndarray, shapes: Sequence[LayerShape]) -> List[np.ndarray]:
    """Reshape a flat vector into per-layer matrices (views, no copy)."""
    flat = np.asarray(flat, dtype=float)
    expected = sum(s.size for s in shapes)
    if flat.ndim != 1 or flat.size != expected:
        raise InvalidArgumentError(
            f"weight vector of length {flat.size} does not match model dimension {expected}"
        )
    matrices = []
    offset = 0
    for shape in shapes:
        matrices.append(flat[offset:offset + shape.size].reshape(shape.rows, shape.cols))
        offset += shape.size
    return matrices


@dataclass
class Batch:
    """
    Labelled minibatch.

    Attributes:
        inputs: Real matrix (n_b x d_in)
        labels: Integer vector (n_b)
    """

    inputs: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=float)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.inputs.ndim != 2:
            raise InvalidArgumentError(f"batch inputs must be 2-D, got shape {self.inputs.shape}")
        if self.inputs.shape[0] < 1:
            raise InvalidArgumentError("batch must contain at least one sample")
        if self.labels.shape != (self.inputs.shape[0],):
            raise InvalidArgumentError(
                f"batch has {self.inputs.shape[0]} inputs but labels of shape {self.labels.shape}"
            )

    @property
    def size(self) -> int:
        return int(self.inputs.shape[0])


# =============================================================================
# Model
# =============================================================================

@dataclass
class Model:
    """
    Dense network: input -> hidden layers (trainable) -> fixed final layer.

    Only the hidden layers are carried in the weight vector; the final layer
    stays floating point and is never quantized or trained.

    Attributes:
        input_dim: Number of input features
        hidden_layer_dims: Width of each trainable layer
        class_count: Number of output classes C
        final_layer: Frozen (hidden_layer_dims[-1] x C) matrix
        activation: Hidden-layer activation
        uses_static_bn: Apply parameter-free batch norm after each hidden linear layer
        epsilon_bn: Variance offset for static batch norm
    """

    input_dim: int
    hidden_layer_dims: Tuple[int, ...]
    class_count: int
    final_layer: np.ndarray
    activation: Activation = Activation.RELU
    uses_static_bn: bool = True
    epsilon_bn: float = DEFAULT_BN_EPSILON
    shapes: Tuple[LayerShape, ...] = field(init=False)

    def __post_init__(self):
        self.hidden_layer_dims = tuple(int(h) for h in self.hidden_layer_dims)
        if self.input_dim < 1 or self.class_count < 2:
            raise InvalidArgumentError("model needs input_dim >= 1 and class_count >= 2")
        if not self.hidden_layer_dims or min(self.hidden_layer_dims) < 1:
            raise InvalidArgumentError("model needs at least one hidden layer of positive width")
        if self.epsilon_bn <= 0:
            raise InvalidArgumentError(f"epsilon_bn must be positive, got {self.epsilon_bn}")
        self.final_layer = np.asarray(self.final_layer, dtype=float)
        expected = (self.hidden_layer_dims[-1], self.class_count)
        if self.final_layer.shape != expected:
            raise InvalidArgumentError(
                f"final layer has shape {self.final_layer.shape}, expected {expected}"
            )
        dims = (self.input_dim,) + self.hidden_layer_dims
        self.shapes = tuple(
            LayerShape(i, dims[i], dims[i + 1]) for i in range(len(self.hidden_layer_dims))
        )

    @property
    def d(self) -> int:
        """Number of trainable (quantized) weights."""
        return sum(s.size for s in self.shapes)

    @classmethod
    def build(
        cls,
        input_dim: int,
        hidden_layer_dims: Sequence[int],
        class_count: int,
        rng: np.random.Generator,
        activation: Activation = Activation.RELU,
        uses_static_bn: bool = True,
        epsilon_bn: float = DEFAULT_BN_EPSILON,
    ) -> "Model":
        """
        Construct a model whose final layer is drawn from ``rng``.

        The final layer is uniform on [-1/sqrt(fan_in), 1/sqrt(fan_in)], so every
        client building from the same seeded stream gets the same matrix.
        """
        fan_in = int(hidden_layer_dims[-1]) if len(hidden_layer_dims) else 0
        if fan_in < 1:
            raise InvalidArgumentError("model needs at least one hidden layer of positive width")
        bound = 1.0 / np.sqrt(fan_in)
        final_layer = rng.uniform(-bound, bound, size=(fan_in, class_count))
        return cls(
            input_dim=input_dim,
            hidden_layer_dims=tuple(hidden_layer_dims),
            class_count=class_count,
            final_layer=final_layer,
            activation=activation,
            uses_static_bn=uses_static_bn,
            epsilon_bn=epsilon_bn,
        )

    def init_latent(self, rng: np.random.Generator, phi: NormalizationFn) -> LatentWeights:
        """
        Shared random initialization of the latent weights.

        Normalized weights start uniform on (-0.5, 0.5) scaled by fan-in so the
        first forward pass is well conditioned; h is their phi-preimage.
        """
        values = []
        for shape in self.shapes:
            scale = min(0.5, 1.0 / np.sqrt(shape.rows))
            values.append(rng.uniform(-scale, scale, size=shape.size))
        w_tilde = np.concatenate(values)
        return LatentWeights(values=phi.inverse(w_tilde), shapes=self.shapes)


# =============================================================================
# Forward / backward
# =============================================================================

def static_batch_norm(x: np.ndarray, epsilon: float = DEFAULT_BN_EPSILON) -> np.ndarray:
    """
    Parameter-free batch norm: (x - mean) / sqrt(var + epsilon), per column.

    Uses the population variance of the batch.

    Raises:
        InvalidArgumentError: If the batch has fewer than 2 rows or epsilon <= 0
    """
    normalized, _ = _batch_norm_with_scale(np.asarray(x, dtype=float), epsilon)
    return normalized


def _batch_norm_with_scale(x: np.ndarray, epsilon: float) -> Tuple[np.ndarray, np.ndarray]:
    if x.ndim != 2 or x.shape[0] < 2:
        raise InvalidArgumentError(
            f"static batch norm needs a batch of at least 2 samples, got shape {x.shape}"
        )
    if epsilon <= 0:
        raise InvalidArgumentError(f"epsilon must be positive, got {epsilon}")
    mean = x.mean(axis=0)
    var = x.var(axis=0)
    inv_std = 1.0 / np.sqrt(var + epsilon)
    return (x - mean) * inv_std, inv_std


def _activate(u: np.ndarray, activation: Activation) -> np.ndarray:
    if activation is Activation.RELU:
        return np.maximum(u, 0.0)
    return np.tanh(u)


def _check_compatible(model: Model, batch: Batch):
    if batch.inputs.shape[1] != model.input_dim:
        raise InvalidArgumentError(
            f"batch has {batch.inputs.shape[1]} features, model expects {model.input_dim}"
        )
    if batch.labels.size and (batch.labels.min() < 0 or batch.labels.max() >= model.class_count):
        raise InvalidArgumentError(f"labels must lie in [0, {model.class_count})")
    if model.uses_static_bn and batch.size < 2:
        raise InvalidArgumentError("static batch norm needs a batch of at least 2 samples")


@dataclass
class _LayerCache:
    inputs: np.ndarray
    normalized: np.ndarray
    outputs: np.ndarray
    inv_std: Optional[np.ndarray]


def _forward_with_cache(model: Model, w_tilde, batch: Batch):
    matrices = split_layers(w_tilde, model.shapes)
    _check_compatible(model, batch)

    caches = []
    a = batch.inputs
    for weights in matrices:
        z = a @ weights
        inv_std = None
        if model.uses_static_bn:
            z, inv_std = _batch_norm_with_scale(z, model.epsilon_bn)
        out = _activate(z, model.activation)
        caches.append(_LayerCache(inputs=a, normalized=z, outputs=out, inv_std=inv_std))
        a = out
    logits = a @ model.final_layer
    return logits, matrices, caches


def forward(model: Model, w_tilde: np.ndarray, batch: Batch) -> np.ndarray:
    """
    Compute logits (n_b x C) for normalized weights ``w_tilde``.

    Raises:
        InvalidArgumentError: On any dimension mismatch
    """
    logits, _, _ = _forward_with_cache(model, w_tilde, batch)
    return logits


def softmax_cross_entropy(logits: np.ndarray, labels: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    Mean softmax cross-entropy and its gradient with respect to the logits.

    Returns:
        Tuple (loss, dlogits)
    """
    n = logits.shape[0]
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_norm
    loss = -float(log_probs[np.arange(n), labels].mean())
    dlogits = np.exp(log_probs)
    dlogits[np.arange(n), labels] -= 1.0
    return loss, dlogits / n


def loss_and_grad_normalized(model: Model, w_tilde: np.ndarray, batch: Batch) -> Tuple[float, np.ndarray]:
    """
    Cross-entropy loss on ``batch`` and its gradient with respect to w~.

    Args:
        model: Network definition
        w_tilde: Flat normalized weight vector of length model.d
        batch: Minibatch

    Returns:
        Tuple (loss, gradient of length model.d)
    """
    logits, matrices, caches = _forward_with_cache(model, w_tilde, batch)
    loss, dlogits = softmax_cross_entropy(logits, batch.labels)

    grads = [None] * len(matrices)
    upstream = dlogits @ model.final_layer.T
    for index in range(len(matrices) - 1, -1, -1):
        cache = caches[index]
        if model.activation is Activation.RELU:
            du = upstream * (cache.normalized > 0)
        else:
            du = upstream * (1.0 - cache.outputs ** 2)
        if model.uses_static_bn:
            n = du.shape[0]
            xn = cache.normalized
            dz = (cache.inv_std / n) * (
                n * du - du.sum(axis=0) - xn * (du * xn).sum(axis=0)
            )
        else:
            dz = du
        grads[index] = cache.inputs.T @ dz
        upstream = dz @ matrices[index].T

    return loss, np.concatenate([g.ravel() for g in grads])


def latent_gradient(g_w_tilde: np.ndarray, h, phi: NormalizationFn) -> np.ndarray:
    """
    Chain rule through the normalization: g_h = phi'(h) * g_w~, elementwise.

    Raises:
        InvalidArgumentError: If the vectors have different lengths
    """
    g = np.asarray(g_w_tilde, dtype=float)
    h_values = np.asarray(getattr(h, "values", h), dtype=float)
    if g.shape != h_values.shape:
        raise InvalidArgumentError(
            f"gradient length {g.size} does not match latent length {h_values.size}"
        )
    return phi.derivative(h_values) * g


def accuracy(model: Model, w: np.ndarray, batch: Batch) -> float:
    """Fraction of samples whose arg-max logit equals the label."""
    logits = forward(model, w, batch)
    return float(np.mean(np.argmax(logits, axis=1) == batch.labels))
