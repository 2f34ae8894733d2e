"""
Wire formats of uplink payloads.

This module provides:
- pack_quantized / unpack_quantized: bit-packed binary (1 bit per entry,
  +1 -> 1) and ternary (2 bits per entry: 00 = 0, 01 = +1, 10 = -1)
- pack_qsgd / unpack_qsgd: float32 norm followed by a ternary sign code
- pack_float32 / unpack_float32: little-endian float32 vectors
- payload_sizes: byte length of each format for a given dimension

Coordinate i lives in byte i // 8 (binary) or i // 4 (ternary), at the
least significant end first.
"""
import logging
from typing import Tuple

import numpy as np

from src.errors import PayloadFormatError
from src.quantize.rounding import QuantizedWeights, QuantLevels

logger = logging.getLogger(__name__)

_FLOAT32 = np.dtype("<f4")


def binary_payload_size(d: int) -> int:
    return (d + 7) // 8


def ternary_payload_size(d: int) -> int:
    return (d + 3) // 4


def qsgd_payload_size(d: int) -> int:
    return _FLOAT32.itemsize + ternary_payload_size(d)


def float32_payload_size(d: int) -> int:
    return _FLOAT32.itemsize * d


# =============================================================================
# Quantized (voting) payloads
# =============================================================================

def _pack_ternary_codes(values: np.ndarray) -> bytes:
    codes = np.zeros(values.size, dtype=np.uint8)
    codes[values == 1] = 1
    codes[values == -1] = 2
    padded = np.zeros(ternary_payload_size(values.size) * 4, dtype=np.uint8)
    padded[:codes.size] = codes
    quads = padded.reshape(-1, 4)
    packed = quads[:, 0] | (quads[:, 1] << 2) | (quads[:, 2] << 4) | (quads[:, 3] << 6)
    return packed.astype(np.uint8).tobytes()


def _unpack_ternary_codes(data: bytes, d: int) -> np.ndarray:
    raw = np.frombuffer(data, dtype=np.uint8)
    codes = np.stack([(raw >> shift) & 0b11 for shift in (0, 2, 4, 6)], axis=1).ravel()[:d]
    if np.any(codes == 3):
        offset = int(np.argmax(codes == 3)) // 4
        raise PayloadFormatError(f"reserved ternary code 11 at byte {offset}")
    values = np.zeros(d, dtype=np.int8)
    values[codes == 1] = 1
    values[codes == 2] = -1
    return values


def pack_quantized(weights: QuantizedWeights) -> bytes:
    """Serialize a quantized vector in its bit-packed form."""
    if weights.levels is QuantLevels.BINARY:
        bits = (weights.values == 1).astype(np.uint8)
        return np.packbits(bits, bitorder="little").tobytes()
    return _pack_ternary_codes(weights.values)


def unpack_quantized(data: bytes, levels: QuantLevels, d: int) -> QuantizedWeights:
    """
    Parse a bit-packed payload of dimension ``d``.

    Raises:
        PayloadFormatError: On a length mismatch or a reserved ternary code
    """
    expected = binary_payload_size(d) if levels is QuantLevels.BINARY else ternary_payload_size(d)
    if len(data) != expected:
        raise PayloadFormatError(
            f"{levels.value} payload for d={d} must be {expected} bytes, got {len(data)}"
        )
    if levels is QuantLevels.BINARY:
        bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), count=d, bitorder="little")
        return QuantizedWeights(levels, np.where(bits == 1, 1, -1))
    return QuantizedWeights(levels, _unpack_ternary_codes(data, d))


# =============================================================================
# Real-valued baseline payloads
# =============================================================================

def pack_qsgd(quantized: np.ndarray) -> bytes:
    """
    Serialize an s = 1 QSGD output: its common magnitude and per-entry sign code.
    """
    quantized = np.asarray(quantized, dtype=float)
    magnitude = float(np.max(np.abs(quantized))) if quantized.size else 0.0
    signs = np.sign(quantized).astype(np.int8)
    return np.array([magnitude], dtype=_FLOAT32).tobytes() + _pack_ternary_codes(signs)


def unpack_qsgd(data: bytes, d: int) -> np.ndarray:
    if len(data) != qsgd_payload_size(d):
        raise PayloadFormatError(
            f"QSGD payload for d={d} must be {qsgd_payload_size(d)} bytes, got {len(data)}"
        )
    magnitude = float(np.frombuffer(data[:_FLOAT32.itemsize], dtype=_FLOAT32)[0])
    signs = _unpack_ternary_codes(data[_FLOAT32.itemsize:], d)
    return magnitude * signs.astype(float)


def pack_float32(vector: np.ndarray) -> bytes:
    return np.asarray(vector, dtype=_FLOAT32).tobytes()


def unpack_float32(data: bytes, d: int) -> np.ndarray:
    if len(data) != float32_payload_size(d):
        raise PayloadFormatError(
            f"float32 payload for d={d} must be {float32_payload_size(d)} bytes, got {len(data)}"
        )
    return np.frombuffer(data, dtype=_FLOAT32).astype(float)


def payload_sizes(d: int) -> Tuple[int, int, int, int]:
    """(binary, ternary, qsgd, float32) payload sizes for dimension ``d``."""
    return (
        binary_payload_size(d),
        ternary_payload_size(d),
        qsgd_payload_size(d),
        float32_payload_size(d),
    )
