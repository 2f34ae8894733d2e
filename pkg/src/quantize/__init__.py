"""
Quantization package.

This module provides:
- Stochastic binary/ternary rounding and the QuantizedWeights payload type
- s = 1 QSGD for the FedPAQ baseline
- Soft-vote clipping and latent reconstruction
- Payload wire formats and their byte sizes
- Closed-form expected quantization errors
"""

from src.quantize.rounding import (
    QuantizedWeights,
    QuantLevels,
    sign_round,
    sto_round,
    sto_round_binary,
    sto_round_ternary,
)
from src.quantize.qsgd import qsgd_quantize
from src.quantize.reconstruction import ClipBounds, reconstruct_from_soft_vote
from src.quantize.payload import (
    binary_payload_size,
    float32_payload_size,
    pack_float32,
    pack_qsgd,
    pack_quantized,
    payload_sizes,
    qsgd_payload_size,
    ternary_payload_size,
    unpack_float32,
    unpack_qsgd,
    unpack_quantized,
)
from src.quantize.error_bounds import (
    binary_quant_error_expectation,
    qsgd_error_bound,
    qsgd_error_expectation,
    ternary_quant_error_expectation,
)

__all__ = [
    'QuantizedWeights',
    'QuantLevels',
    'sign_round',
    'sto_round',
    'sto_round_binary',
    'sto_round_ternary',
    'qsgd_quantize',
    'ClipBounds',
    'reconstruct_from_soft_vote',
    'binary_payload_size',
    'float32_payload_size',
    'pack_float32',
    'pack_qsgd',
    'pack_quantized',
    'payload_sizes',
    'qsgd_payload_size',
    'ternary_payload_size',
    'unpack_float32',
    'unpack_qsgd',
    'unpack_quantized',
    'binary_quant_error_expectation',
    'qsgd_error_bound',
    'qsgd_error_expectation',
    'ternary_quant_error_expectation',
]
