"""
Test Suite for vote aggregation, reputation and robust baselines

Run with: pytest tests/vote_testing/test_voting.py -v
"""
import sys
import unittest
from pathlib import Path

import numpy as np

# Add project root to path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.errors import DegenerateStateError, DomainError, InvalidArgumentError
from src.quantize import QuantizedWeights, QuantLevels
from src.vote import (
    ReputationState,
    VoteBatch,
    coordinate_median,
    credibility_score,
    krum_scores,
    krum_select,
    one_shot_error_bound,
    plurality,
    reputation_weights,
    signsgd_majority,
    soft_vote,
    update_reputation,
    weighted_soft_vote,
)


def _binary_batch(columns) -> VoteBatch:
    votes = np.asarray(columns).T if np.ndim(columns) == 2 else np.asarray(columns)[:, None]
    return VoteBatch(QuantLevels.BINARY, votes, tuple(range(votes.shape[0])))


class TestPlurality(unittest.TestCase):
    """Test plurality vote and the signSGD entry point."""

    def test_01_strict_majority(self):
        out = plurality(_binary_batch([1, 1, -1]), np.random.default_rng(0))
        self.assertEqual(list(out.values), [1])
        self.assertIs(out.levels, QuantLevels.BINARY)
        print("✓ Strict majority passed")

    def test_02_random_tie_break(self):
        votes = np.vstack([np.ones(10_000), -np.ones(10_000)])
        batch = VoteBatch(QuantLevels.BINARY, votes, (0, 1))
        out = plurality(batch, np.random.default_rng(4))
        self.assertAlmostEqual((out.values == 1).mean(), 0.5, delta=0.02)
        majority = signsgd_majority(votes, np.random.default_rng(5))
        self.assertAlmostEqual((majority == 1).mean(), 0.5, delta=0.02)
        print("✓ Random tie-break passed")

    def test_03_single_voter(self):
        vote = np.random.default_rng(1).choice([-1, 1], size=20)
        batch = VoteBatch(QuantLevels.BINARY, vote[None, :], (7,))
        np.testing.assert_array_equal(plurality(batch, np.random.default_rng(0)).values, vote)
        np.testing.assert_array_equal(signsgd_majority(vote[None, :], np.random.default_rng(0)), vote)

    def test_04_empty_batch_rejected(self):
        with self.assertRaises(InvalidArgumentError):
            VoteBatch.from_payloads([])
        with self.assertRaises(InvalidArgumentError):
            signsgd_majority(np.zeros((0, 3)), np.random.default_rng(0))
        with self.assertRaises(InvalidArgumentError):
            signsgd_majority(np.array([[1, 0]]), np.random.default_rng(0))

    def test_05_ternary_plurality(self):
        votes = np.array([[1, 1, -1, 0],
                          [1, 0, -1, 0],
                          [0, -1, 0, 1]])
        batch = VoteBatch(QuantLevels.TERNARY, votes, (0, 1, 2))
        out = plurality(batch, np.random.default_rng(0))
        self.assertIs(out.levels, QuantLevels.TERNARY)
        self.assertEqual(list(out.values[[0, 2, 3]]), [1, -1, 0])
        self.assertIn(out.values[1], (-1, 0, 1))
        tied = VoteBatch(QuantLevels.TERNARY, np.tile([[1], [0], [-1]], (1, 9000)), (0, 1, 2))
        picks = plurality(tied, np.random.default_rng(3)).values
        for level in (-1, 0, 1):
            self.assertAlmostEqual((picks == level).mean(), 1 / 3, delta=0.03)
        print("✓ Ternary plurality passed")

    def test_06_agrees_with_soft_vote(self):
        rng = np.random.default_rng(9)
        votes = rng.choice([-1, 1], size=(6, 500))
        batch = VoteBatch(QuantLevels.BINARY, votes, tuple(range(6)))
        p = soft_vote(batch)
        out = plurality(batch, rng).values
        untied = p != 0.5
        np.testing.assert_array_equal(out[untied], np.sign(2 * p[untied] - 1))

    def test_07_from_payloads(self):
        payloads = [QuantizedWeights(QuantLevels.BINARY, np.array([1, -1])),
                    QuantizedWeights(QuantLevels.BINARY, np.array([1, 1]))]
        batch = VoteBatch.from_payloads(payloads, client_ids=[4, 9])
        self.assertEqual(batch.client_ids, (4, 9))
        self.assertEqual(batch.row(1), payloads[1])
        mixed = payloads + [QuantizedWeights(QuantLevels.TERNARY, np.array([0, 1]))]
        with self.assertRaises(InvalidArgumentError):
            VoteBatch.from_payloads(mixed)


class TestSoftVote(unittest.TestCase):
    """Test soft and weighted soft vote."""

    def test_01_fraction_of_plus_ones(self):
        self.assertEqual(soft_vote(_binary_batch([1, 1, -1]))[0], 2 / 3)
        self.assertEqual(soft_vote(_binary_batch([-1, -1, -1]))[0], 0.0)

    def test_02_ternary_mean_vote(self):
        batch = VoteBatch(QuantLevels.TERNARY, np.array([[1], [0], [0], [-1], [1]]), tuple(range(5)))
        self.assertAlmostEqual(soft_vote(batch)[0], (1 + 1 / 5) / 2)

    def test_03_weighted_examples(self):
        self.assertEqual(weighted_soft_vote(_binary_batch([1, -1, -1]), [1.0, 0.0, 0.0])[0], 1.0)
        self.assertEqual(weighted_soft_vote(_binary_batch([1, -1, 1]), [0.5, 0.5, 0.0])[0], 0.5)
        print("✓ Weighted soft vote passed")

    def test_04_uniform_weights_bit_exact(self):
        rng = np.random.default_rng(2)
        for m in (3, 7, 10):
            votes = rng.choice([-1, 1], size=(m, 300))
            batch = VoteBatch(QuantLevels.BINARY, votes, tuple(range(m)))
            self.assertTrue(np.array_equal(weighted_soft_vote(batch, np.full(m, 1.0 / m)), soft_vote(batch)))

    def test_05_weight_validation(self):
        batch = _binary_batch([1, -1, 1])
        for bad in ([0.5, 0.5, 0.5], [1.2, -0.2, 0.0], [0.5, 0.5]):
            with self.assertRaises(InvalidArgumentError):
                weighted_soft_vote(batch, bad)


class TestReputation(unittest.TestCase):
    """Test credibility scores and reputation weights."""

    def test_01_credibility(self):
        a = QuantizedWeights(QuantLevels.BINARY, np.array([1, -1, 1, 1]))
        self.assertEqual(credibility_score(a, a), 1.0)
        self.assertEqual(credibility_score(a, a.negate()), 0.0)
        self.assertEqual(credibility_score(a, np.array([1, -1, 1, -1])), 0.75)
        with self.assertRaises(InvalidArgumentError):
            credibility_score(a, np.array([1, 1]))
        print("✓ Credibility score passed")

    def test_02_ema_update(self):
        state = ReputationState(nu=np.array([1.0, 0.8]), beta=0.5)
        updated = update_reputation(state, [1.0, 0.4])
        np.testing.assert_allclose(updated.nu, [1.0, 0.6])
        state = ReputationState(nu=np.array([1.0]), beta=0.5)
        for _ in range(40):
            state = update_reputation(state, [0.3])
        self.assertAlmostEqual(state.nu[0], 0.3, places=10)

    def test_03_weights(self):
        np.testing.assert_allclose(reputation_weights(ReputationState(np.ones(4))), [0.25] * 4)
        np.testing.assert_allclose(reputation_weights(ReputationState(np.array([0.9, 0.1]))), [0.9, 0.1])
        nu = np.array([0.2, 0.5, 0.1])
        np.testing.assert_allclose(reputation_weights(ReputationState(nu)),
                                   reputation_weights(ReputationState(nu * 1.7)), rtol=1e-12)
        self.assertAlmostEqual(reputation_weights(ReputationState.initial(5)).sum(), 1.0, places=12)

    def test_04_degenerate(self):
        with self.assertRaises(DegenerateStateError):
            reputation_weights(ReputationState(np.zeros(3)))
        with self.assertRaises(InvalidArgumentError):
            ReputationState(np.array([0.5]), beta=1.0)
        print("✓ Degenerate reputation passed")


class TestRobustAggregation(unittest.TestCase):
    """Test coordinate median and Krum."""

    def test_01_median(self):
        self.assertEqual(coordinate_median(np.array([[1.0], [2.0], [100.0]]))[0], 2.0)
        self.assertEqual(coordinate_median(np.array([[1.0], [3.0]]))[0], 2.0)
        rows = np.random.default_rng(0).normal(size=(7, 5))
        np.testing.assert_array_equal(coordinate_median(rows), coordinate_median(rows[::-1]))
        with self.assertRaises(InvalidArgumentError):
            coordinate_median(np.zeros((0, 3)))

    def test_02_krum_cluster(self):
        rows = np.array([[1.0, 1.0], [1.0, 1.0], [1.0, 1.0], [50.0, -50.0]])
        self.assertIn(krum_select(rows, 1), (0, 1, 2))
        self.assertEqual(krum_select(np.ones((5, 3)), 1), 0)

    def test_03_krum_brute_force(self):
        rows = np.random.default_rng(6).normal(size=(6, 3))
        f = 1
        expected = []
        for i in range(6):
            distances = sorted(float(np.sum((rows[i] - rows[j]) ** 2)) for j in range(6) if j != i)
            expected.append(sum(distances[:6 - f - 2]))
        np.testing.assert_allclose(krum_scores(rows, f), expected, rtol=1e-12)
        self.assertEqual(krum_select(rows, f), int(np.argmin(expected)))
        print("✓ Krum brute force passed")

    def test_04_krum_too_few_clients(self):
        with self.assertRaises(InvalidArgumentError):
            krum_select(np.zeros((3, 2)), 1)


class TestOneShotBound(unittest.TestCase):
    """Test the one-shot majority-vote error bound."""

    def test_01_values(self):
        self.assertAlmostEqual(one_shot_error_bound(0.1, 10), 0.017472, places=5)
        self.assertAlmostEqual(one_shot_error_bound(0.5 - 1e-9, 10), 1.0, places=6)
        with self.assertRaises(DomainError):
            one_shot_error_bound(0.5, 10)

    def test_02_monotone_in_voters(self):
        for s in (0.1, 0.2, 0.3, 0.4):
            values = [one_shot_error_bound(s, m) for m in range(1, 50)]
            self.assertTrue(all(a > b for a, b in zip(values, values[1:])))
            self.assertTrue(all(0 < v <= 1 for v in values))

    def test_03_monte_carlo(self):
        rng = np.random.default_rng(15)
        errors = rng.random((100_000, 15)) < 0.2
        empirical = np.mean(errors.sum(axis=1) >= 7.5)
        self.assertLessEqual(empirical, one_shot_error_bound(0.2, 15))
        print("✓ One-shot bound Monte-Carlo passed")


if __name__ == "__main__":
    unittest.main(verbosity=2)
