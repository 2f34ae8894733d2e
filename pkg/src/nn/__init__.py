"""
Neural network core for latent-weight binary/ternary training.

This module provides:
- NormalizationFn: range-normalization phi and its inverse/derivative
- LatentWeights, Model, Batch: network containers
- forward, loss_and_grad_normalized, latent_gradient: training math
- static_batch_norm: parameter-free batch normalization
- op_count: forward-pass operation and energy accounting
"""

from src.nn.normalization import (
    NormalizationFamily,
    NormalizationFn,
    normalize,
    normalize_inverse,
)
from src.nn.network import (
    Activation,
    Batch,
    LatentWeights,
    LayerShape,
    Model,
    accuracy,
    forward,
    latent_gradient,
    loss_and_grad_normalized,
    softmax_cross_entropy,
    split_layers,
    static_batch_norm,
)
from src.nn.op_count import OpCount, WeightType, op_count, op_count_table

__all__ = [
    'NormalizationFamily',
    'NormalizationFn',
    'normalize',
    'normalize_inverse',
    'Activation',
    'Batch',
    'LatentWeights',
    'LayerShape',
    'Model',
    'accuracy',
    'forward',
    'latent_gradient',
    'loss_and_grad_normalized',
    'softmax_cross_entropy',
    'split_layers',
    'static_batch_norm',
    'OpCount',
    'WeightType',
    'op_count',
    'op_count_table',
]
