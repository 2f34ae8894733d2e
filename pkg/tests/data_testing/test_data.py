"""
Test Suite for dataset sourcing and partitioning

Tests:
- Synthetic blobs: determinism, balance, separability
- IDX reader/writer: round trips, gzip, malformed files
- IID and Dirichlet partitioning: conservation, sizes, heterogeneity

Run with: pytest tests/data_testing/test_data.py -v
"""
import gzip
import os
import shutil
import sys
import tempfile
import unittest
from pathlib import Path

import numpy as np

# Add project root to path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.data import (
    DatasetShard,
    PartitionKind,
    PartitionSpec,
    class_histogram_frame,
    load_idx,
    partition,
    partition_indices,
    read_idx,
    synthetic_classification,
    write_idx,
    write_idx_pair,
)
from src.errors import IdxFormatError, InvalidArgumentError


def _labelled(n: int, class_count: int) -> DatasetShard:
    labels = np.arange(n) % class_count
    inputs = np.arange(n, dtype=float)[:, None]
    return DatasetShard(inputs, labels, class_count)


class TestSynthetic(unittest.TestCase):
    """Test the Gaussian-blob generator."""

    def test_01_deterministic(self):
        a = synthetic_classification(200, 5, 3, 4.0, np.random.default_rng(1))
        b = synthetic_classification(200, 5, 3, 4.0, np.random.default_rng(1))
        self.assertTrue(np.array_equal(a.inputs, b.inputs))
        self.assertTrue(np.array_equal(a.labels, b.labels))
        print("✓ Synthetic determinism passed")

    def test_02_balanced(self):
        for n, c in ((101, 4), (50, 2), (37, 10)):
            counts = synthetic_classification(n, 3, c, 2.0, np.random.default_rng(n)).class_histogram()
            self.assertLessEqual(counts.max() - counts.min(), 1)
            self.assertEqual(counts.sum(), n)

    def test_03_linearly_separable(self):
        data = synthetic_classification(1000, 10, 2, 10.0, np.random.default_rng(3))
        design = np.hstack([data.inputs, np.ones((len(data), 1))])
        targets = np.where(data.labels == 1, 1.0, -1.0)
        coef, *_ = np.linalg.lstsq(design, targets, rcond=None)
        accuracy = np.mean((design @ coef > 0) == (data.labels == 1))
        self.assertGreaterEqual(accuracy, 0.99)
        print("✓ Linear separability passed")

    def test_04_centroid_separation_low_dimension(self):
        data = synthetic_classification(20000, 2, 5, 6.0, np.random.default_rng(4), noise_std=0.5)
        means = np.array([data.inputs[data.labels == c].mean(axis=0) for c in range(5)])
        for i in range(5):
            for j in range(i + 1, 5):
                self.assertGreater(np.linalg.norm(means[i] - means[j]), 6.0 * 0.97)

    def test_05_invalid_sizes(self):
        rng = np.random.default_rng(0)
        for args in ((3, 2, 5, 1.0), (10, 0, 2, 1.0), (10, 2, 1, 1.0), (10, 2, 2, 0.0)):
            with self.assertRaises(InvalidArgumentError):
                synthetic_classification(*args, rng)


class TestIdxFormat(unittest.TestCase):
    """Test IDX reading and writing."""

    @classmethod
    def setUpClass(cls):
        cls.temp_dir = tempfile.mkdtemp()

    @classmethod
    def tearDownClass(cls):
        shutil.rmtree(cls.temp_dir, ignore_errors=True)

    def _path(self, name: str) -> str:
        return os.path.join(self.temp_dir, name)

    def test_01_round_trip(self):
        rng = np.random.default_rng(0)
        images = rng.integers(0, 256, size=(7, 4, 3), dtype=np.uint8)
        labels = rng.integers(0, 10, size=7).astype(np.uint8)
        write_idx(self._path("rt-images"), images)
        write_idx(self._path("rt-labels"), labels)
        self.assertTrue(np.array_equal(read_idx(self._path("rt-images")), images))
        dataset = load_idx(self._path("rt-images"), self._path("rt-labels"), class_count=10)
        self.assertEqual(dataset.inputs.shape, (7, 12))
        self.assertEqual(dataset.image_shape, (4, 3))
        np.testing.assert_allclose(dataset.inputs * 255.0, images.reshape(7, 12))
        np.testing.assert_array_equal(dataset.labels, labels)
        print("✓ IDX round trip passed")

    def test_02_header_layout(self):
        write_idx(self._path("hdr-labels"), np.array([1, 2, 3], dtype=np.uint8))
        with open(self._path("hdr-labels"), "rb") as f:
            raw = f.read()
        self.assertEqual(raw, bytes([0, 0, 8, 1, 0, 0, 0, 3, 1, 2, 3]))

    def test_03_gzip(self):
        images = np.zeros((2, 2, 2), dtype=np.uint8)
        write_idx(self._path("gz-images.gz"), images)
        write_idx(self._path("gz-labels.gz"), np.array([0, 1], dtype=np.uint8))
        with gzip.open(self._path("gz-images.gz"), "rb") as f:
            self.assertEqual(f.read(4), bytes([0, 0, 8, 3]))
        dataset = load_idx(self._path("gz-images.gz"), self._path("gz-labels.gz"))
        np.testing.assert_array_equal(dataset.inputs, np.zeros((2, 4)))
        self.assertEqual(dataset.class_count, 2)

    def test_04_truncated(self):
        write_idx(self._path("tr-images"), np.ones((5, 3, 3), dtype=np.uint8))
        with open(self._path("tr-images"), "rb") as f:
            raw = f.read()
        with open(self._path("tr-images"), "wb") as f:
            f.write(raw[:-4])
        with self.assertRaises(IdxFormatError) as ctx:
            read_idx(self._path("tr-images"))
        self.assertEqual(ctx.exception.offset, len(raw) - 4)
        with open(self._path("tr-short"), "wb") as f:
            f.write(bytes([0, 0, 8, 3, 0, 0]))
        with self.assertRaises(IdxFormatError):
            read_idx(self._path("tr-short"))
        print("✓ Truncation detection passed")

    def test_05_bad_magic(self):
        with open(self._path("bad-magic"), "wb") as f:
            f.write(bytes([0, 0, 9, 1, 0, 0, 0, 1, 5]))
        with self.assertRaises(IdxFormatError) as ctx:
            read_idx(self._path("bad-magic"))
        self.assertEqual(ctx.exception.offset, 0)
        write_idx(self._path("swap-labels"), np.array([0, 1], dtype=np.uint8))
        with self.assertRaises(IdxFormatError):
            load_idx(self._path("swap-labels"), self._path("swap-labels"))

    def test_06_count_mismatch(self):
        write_idx(self._path("cm-images"), np.zeros((3, 2, 2), dtype=np.uint8))
        write_idx(self._path("cm-labels"), np.zeros(2, dtype=np.uint8))
        with self.assertRaises(IdxFormatError) as ctx:
            load_idx(self._path("cm-images"), self._path("cm-labels"))
        self.assertEqual(ctx.exception.offset, 4)

    def test_07_missing_file(self):
        with self.assertRaises(FileNotFoundError):
            read_idx(self._path("does-not-exist"))

    def test_08_pair_writer(self):
        data = synthetic_classification(12, 4, 3, 2.0, np.random.default_rng(0))
        scaled = DatasetShard((data.inputs - data.inputs.min()) / np.ptp(data.inputs), data.labels, 3)
        write_idx_pair(self._path("pair-images"), self._path("pair-labels"), scaled)
        back = load_idx(self._path("pair-images"), self._path("pair-labels"), class_count=3)
        self.assertEqual(back.inputs.shape, (12, 4))
        np.testing.assert_allclose(back.inputs, scaled.inputs, atol=0.5 / 255 + 1e-12)
        np.testing.assert_array_equal(back.labels, data.labels)


class TestPartition(unittest.TestCase):
    """Test IID and Dirichlet partitioning."""

    def _assert_conserves(self, shards, n):
        indices = np.concatenate(shards)
        self.assertEqual(indices.size, n)
        self.assertEqual(np.unique(indices).size, n)

    def test_01_iid_sizes(self):
        shards = partition(_labelled(100, 4), PartitionSpec(PartitionKind.IID, 10), np.random.default_rng(0))
        self.assertEqual([len(s) for s in shards], [10] * 10)
        uneven = partition_indices(np.zeros(103), 2, PartitionSpec(PartitionKind.IID, 10), np.random.default_rng(0))
        sizes = [len(s) for s in uneven]
        self.assertLessEqual(max(sizes) - min(sizes), 1)
        self._assert_conserves(uneven, 103)
        print("✓ IID sizes passed")

    def test_02_conservation(self):
        data = _labelled(500, 5)
        for spec in (PartitionSpec(PartitionKind.IID, 7), PartitionSpec(PartitionKind.DIRICHLET, 7, 0.5)):
            idx = partition_indices(data.labels, 5, spec, np.random.default_rng(2))
            self._assert_conserves(idx, 500)
            shards = partition(data, spec, np.random.default_rng(2))
            merged = np.sort(np.concatenate([s.inputs[:, 0] for s in shards]))
            np.testing.assert_array_equal(merged, data.inputs[:, 0])

    def test_03_heterogeneity_monotone(self):
        data = _labelled(1000, 10)

        def mean_max_fraction(alpha):
            values = []
            for seed in range(50):
                shards = partition(data, PartitionSpec(PartitionKind.DIRICHLET, 10, alpha),
                                   np.random.default_rng(seed))
                values.extend(s.class_histogram().max() / len(s) for s in shards)
            return np.mean(values)

        self.assertGreater(mean_max_fraction(0.1), mean_max_fraction(10.0))
        print("✓ Dirichlet heterogeneity passed")

    def test_04_large_alpha_approaches_iid(self):
        data = _labelled(2000, 5)
        global_mix = np.full(5, 0.2)

        def chi_square(alpha):
            shards = partition(data, PartitionSpec(PartitionKind.DIRICHLET, 10, alpha), np.random.default_rng(7))
            distances = []
            for shard in shards:
                mix = shard.class_histogram() / len(shard)
                distances.append(np.sum((mix - global_mix) ** 2 / global_mix))
            return np.mean(distances)

        self.assertLess(chi_square(100.0), chi_square(0.1))

    def test_05_no_empty_shards(self):
        data = _labelled(40, 4)
        for seed in range(10):
            shards = partition(data, PartitionSpec(PartitionKind.DIRICHLET, 20, 0.01), np.random.default_rng(seed))
            self.assertTrue(all(len(s) > 0 for s in shards))
            self._assert_conserves([s.inputs[:, 0].astype(int) for s in shards], 40)

    def test_06_errors(self):
        with self.assertRaises(InvalidArgumentError):
            partition(_labelled(5, 2), PartitionSpec(PartitionKind.IID, 6), np.random.default_rng(0))
        with self.assertRaises(InvalidArgumentError):
            PartitionSpec(PartitionKind.DIRICHLET, 4, 0.0)
        with self.assertRaises(InvalidArgumentError):
            PartitionSpec(PartitionKind.IID, 0)

    def test_07_histogram_frame(self):
        data = _labelled(60, 3)
        shards = partition(data, PartitionSpec(PartitionKind.DIRICHLET, 4, 0.5), np.random.default_rng(1))
        frame = class_histogram_frame(shards)
        self.assertEqual(list(frame.columns), ["class_0", "class_1", "class_2", "total"])
        self.assertEqual(frame["total"].sum(), 60)
        np.testing.assert_array_equal(frame[["class_0", "class_1", "class_2"]].sum().values, [20, 20, 20])


if __name__ == "__main__":
    unittest.main(verbosity=2)
