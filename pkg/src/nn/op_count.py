"""
Forward-pass operation and energy accounting.

Counts multiply and add operations of one forward pass and converts them to
energy with fixed per-operation costs (3.7 pJ per float multiply, 0.9 pJ
per float add).
"""
import logging
from dataclasses import dataclass
from enum import Enum

import pandas as pd

from src.nn.network import Model

logger = logging.getLogger(__name__)

MULTIPLY_PJ = 3.7
ADD_PJ = 0.9
PJ_TO_MJ = 1e-9


class WeightType(Enum):
    """
    Weight representation of the trainable layers.

    Attributes:
        FLOAT: Full-precision weights, every product is a multiply
        BINARY: +-1 weights, every product becomes a signed add
    """
    FLOAT = "float"
    BINARY = "binary"


@dataclass(frozen=True)
class OpCount:
    adds: int
    muls: int

    @property
    def energy_mj(self) -> float:
        return (MULTIPLY_PJ * self.muls + ADD_PJ * self.adds) * PJ_TO_MJ

    def __add__(self, other: "OpCount") -> "OpCount":
        return OpCount(adds=self.adds + other.adds, muls=self.muls + other.muls)


def _dense_layer(rows: int, cols: int, batch_size: int, weight_type: WeightType,
                 count_sign_flips: bool) -> OpCount:
    if weight_type is WeightType.FLOAT:
        return OpCount(adds=batch_size * cols * (rows - 1), muls=batch_size * rows * cols)
    # binary: accumulation adds, plus one add per product when a sign flip
    # is charged as an add
    per_output = 2 * rows - 1 if count_sign_flips else rows - 1
    return OpCount(adds=batch_size * cols * per_output, muls=0)


def _static_bn(features: int, batch_size: int) -> OpCount:
    # mean (n-1 adds, 1 mul), centering (n adds), variance (n-1 adds, n+1 muls),
    # scaling (n muls)
    n = batch_size
    return OpCount(adds=features * (3 * n - 2), muls=features * (2 * n + 2))


def op_count(model: Model, weight_type: WeightType, batch_size: int = 1,
             count_sign_flips: bool = True) -> OpCount:
    """
    Count adds and multiplies of one forward pass over ``batch_size`` samples.

    The frozen final layer and static batch norm are always floating point;
    activations are not counted.

    Args:
        model: Network definition
        weight_type: FLOAT or BINARY trainable layers
        batch_size: Number of samples in the pass
        count_sign_flips: For BINARY, charge each +-1 product as one add
            (default) or treat it as free

    Returns:
        OpCount with adds, muls and energy_mj
    """
    total = OpCount(adds=0, muls=0)
    for shape in model.shapes:
        total = total + _dense_layer(shape.rows, shape.cols, batch_size, weight_type, count_sign_flips)
        if model.uses_static_bn:
            total = total + _static_bn(shape.cols, batch_size)
    final_rows, final_cols = model.final_layer.shape
    total = total + _dense_layer(final_rows, final_cols, batch_size, WeightType.FLOAT, True)
    logger.debug(f"op_count({weight_type.value}, batch={batch_size}): {total}")
    return total


def op_count_table(model: Model, batch_size: int = 1, count_sign_flips: bool = True) -> pd.DataFrame:
    """Side-by-side float/binary counts with the energy ratio."""
    rows = []
    for weight_type in WeightType:
        counts = op_count(model, weight_type, batch_size, count_sign_flips)
        rows.append({
            "weight_type": weight_type.value,
            "adds": counts.adds,
            "muls": counts.muls,
            "energy_mJ": counts.energy_mj,
        })
    frame = pd.DataFrame(rows).set_index("weight_type")
    frame["energy_ratio"] = frame["energy_mJ"] / frame.loc[WeightType.BINARY.value, "energy_mJ"]
    return frame
