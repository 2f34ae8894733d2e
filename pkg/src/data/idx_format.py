"""
IDX container reader and writer (the MNIST / Fashion-MNIST file format).

This module provides:
- read_idx: parse any unsigned-byte IDX file into a numpy array
- load_idx: read an images/labels pair into a DatasetShard scaled to [0, 1]
- write_idx / write_idx_pair: the inverse, used to materialize partitions

Layout (big-endian):
    [offset] [type]   [description]
    0000     u32      magic: 0x00000800 | ndim (0x803 images, 0x801 labels)
    0004     u32 x n  dimension sizes
    ....     u8[]     values, row-major

Files ending in ``.gz`` are read and written through gzip.
"""
import gzip
import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np

from src.data.dataset import DatasetShard
from src.errors import IdxFormatError, InvalidArgumentError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

UBYTE_TYPE_CODE = 0x08
IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801
_HEADER = np.dtype(">u4")


def _read_bytes(path: Path) -> bytes:
    opener = gzip.open if path.suffix == ".gz" else open
    try:
        with opener(path, "rb") as f:
            return f.read()
    except (OSError, EOFError) as e:
        if isinstance(e, FileNotFoundError):
            raise
        raise IdxFormatError(f"unreadable IDX file: {e}", offset=0, path=str(path)) from e


def read_idx(path: PathLike, expected_magic: Optional[int] = None) -> np.ndarray:
    """
    Parse an unsigned-byte IDX file.

    Args:
        path: File path (``.gz`` is decompressed transparently)
        expected_magic: Optional magic number the file must carry

    Returns:
        uint8 array with the file's dimensions

    Raises:
        FileNotFoundError: If the file does not exist
        IdxFormatError: On a bad magic number or truncated content
    """
    path = Path(path)
    data = _read_bytes(path)
    if len(data) < 4:
        raise IdxFormatError("truncated header", offset=len(data), path=str(path))

    magic = int(np.frombuffer(data, dtype=_HEADER, count=1)[0])
    ndim = magic & 0xFF
    if magic >> 16 != 0 or (magic >> 8) & 0xFF != UBYTE_TYPE_CODE or ndim == 0:
        raise IdxFormatError(f"bad magic number 0x{magic:08x}", offset=0, path=str(path))
    if expected_magic is not None and magic != expected_magic:
        raise IdxFormatError(
            f"bad magic number 0x{magic:08x}, expected 0x{expected_magic:08x}", offset=0, path=str(path)
        )

    header_end = 4 + 4 * ndim
    if len(data) < header_end:
        raise IdxFormatError("truncated dimension header", offset=len(data), path=str(path))
    dims = tuple(int(v) for v in np.frombuffer(data, dtype=_HEADER, count=ndim, offset=4))

    size = int(np.prod(dims, dtype=np.int64))
    if len(data) < header_end + size:
        raise IdxFormatError(
            f"truncated data: expected {size} values, found {len(data) - header_end}",
            offset=len(data),
            path=str(path),
        )
    if len(data) > header_end + size:
        logger.warning(f"{path}: {len(data) - header_end - size} trailing bytes ignored")
    return np.frombuffer(data, dtype=np.uint8, count=size, offset=header_end).reshape(dims)


def load_idx(images_path: PathLike, labels_path: PathLike,
             class_count: Optional[int] = None) -> DatasetShard:
    """
    Load an images/labels IDX pair as a dataset with pixels scaled to [0, 1].

    Args:
        images_path: Image file (magic 0x803)
        labels_path: Label file (magic 0x801)
        class_count: Number of classes; defaults to max(label) + 1

    Raises:
        IdxFormatError: On bad magic, truncation or mismatched counts
    """
    images = read_idx(images_path, IMAGE_MAGIC)
    labels = read_idx(labels_path, LABEL_MAGIC)
    if images.shape[0] != labels.shape[0]:
        raise IdxFormatError(
            f"label count {labels.shape[0]} does not match image count {images.shape[0]}",
            offset=4,
            path=str(labels_path),
        )
    inputs = images.reshape(images.shape[0], -1).astype(float) / 255.0
    if class_count is None:
        class_count = max(2, int(labels.max()) + 1) if labels.size else 2
    logger.info(f"Loaded {images.shape[0]} samples of shape {images.shape[1:]} from {images_path}")
    return DatasetShard(inputs, labels.astype(np.int64), class_count,
                        image_shape=(int(images.shape[1]), int(images.shape[2])))


def write_idx(path: PathLike, values: np.ndarray) -> None:
    """
    Write a uint8 array as an IDX file.

    Raises:
        InvalidArgumentError: If values fall outside [0, 255] or the array is 0-D
    """
    values = np.asarray(values)
    if values.ndim == 0 or values.ndim > 255:
        raise InvalidArgumentError("IDX arrays need between 1 and 255 dimensions")
    if values.size and (values.min() < 0 or values.max() > 255):
        raise InvalidArgumentError("IDX unsigned-byte values must lie in [0, 255]")
    header = np.array([(UBYTE_TYPE_CODE << 8) | values.ndim, *values.shape], dtype=_HEADER)
    payload = header.tobytes() + values.astype(np.uint8).tobytes()

    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "wb") as f:
        f.write(payload)


def write_idx_pair(images_path: PathLike, labels_path: PathLike, dataset: DatasetShard) -> None:
    """
    Write a dataset as an images/labels pair.

    Pixels are stored as round(255 x) clipped to a byte; features without an
    image shape are written as 1 x d images.
    """
    rows, cols = dataset.image_shape or (1, dataset.feature_count)
    pixels = np.clip(np.rint(dataset.inputs * 255.0), 0, 255).astype(np.uint8)
    write_idx(images_path, pixels.reshape(len(dataset), rows, cols))
    write_idx(labels_path, dataset.labels.astype(np.uint8))
