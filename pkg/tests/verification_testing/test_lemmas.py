"""
Test Suite for the Monte-Carlo verification suites

Tests:
- One-shot vote error stays below its analytic bound
- Soft vote is unbiased, and a biased rounding is caught
- Stochastic rounding and QSGD error energies match their closed forms
- Error growth with dimension (rounding vs. QSGD)
- Report table and trial-count validation

Run with: pytest tests/verification_testing/test_lemmas.py -v
"""
import sys
import unittest
from pathlib import Path

import numpy as np

# Add project root to path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from src.errors import InvalidArgumentError
from src.quantize import QuantizedWeights, QuantLevels
from src.verification import (
    format_report,
    report_frame,
    run_lemma_suites,
    verify_dimension_scaling,
    verify_qsgd_error,
    verify_rounding_error,
    verify_soft_vote_unbiased,
    verify_vote_error_bound,
)


def biased_rounder(w_tilde, levels, rng):
    """Rounds to +1 with probability (1 + w) / 2 + 0.1."""
    w_tilde = np.asarray(w_tilde, dtype=float)
    pi = np.clip((w_tilde + 1.0) / 2.0 + 0.1, 0.0, 1.0)
    return QuantizedWeights(QuantLevels.BINARY, np.where(rng.random(w_tilde.size) < pi, 1, -1))


class TestVerificationSuites(unittest.TestCase):
    """Test each suite at its reference trial counts."""

    def test_01_vote_error_bound(self):
        report = verify_vote_error_bound(100_000, np.random.default_rng(0))
        self.assertEqual(len(report.checks), 12)
        self.assertTrue(report.passed, format_report([report], verbose=True))
        self.assertIn("bound(s=0.1, M=10) = 0.017472", report.notes[0])
        print("✓ Vote error bound passed")

    def test_02_soft_vote_unbiased(self):
        report = verify_soft_vote_unbiased(10_000, np.random.default_rng(1))
        self.assertTrue(report.passed, format_report([report], verbose=True))

    def test_03_biased_rounding_detected(self):
        report = verify_soft_vote_unbiased(2_000, np.random.default_rng(1), rounder=biased_rounder)
        self.assertFalse(report.passed)
        print("✓ Injected rounding bias detected")

    def test_04_rounding_error(self):
        report = verify_rounding_error(100_000, np.random.default_rng(2))
        self.assertEqual(len(report.checks), 40)
        self.assertTrue(report.passed, format_report([report], verbose=True))

    def test_05_qsgd_error(self):
        report = verify_qsgd_error(100_000, np.random.default_rng(3))
        self.assertEqual(report.checks[0].expected, 10.0)
        # x = [3, 4] plus 20 Gaussian vectors for each of d = 4, 64, 1024
        self.assertEqual(len(report.checks), 1 + 3 * 20)
        self.assertTrue(all(c.tolerance == 0.02 * c.expected for c in report.checks[1:]))
        self.assertTrue(report.passed, format_report([report], verbose=True))

    def test_06_dimension_scaling(self):
        report = verify_dimension_scaling(np.random.default_rng(4))
        self.assertTrue(report.passed, format_report([report], verbose=True))
        slopes = [c.observed for c in report.checks]
        self.assertLess(slopes[0], slopes[1])
        print(f"✓ Scaling slopes: rounding {slopes[0]:.2f}, qsgd {slopes[1]:.2f}")


class TestSuiteRunner(unittest.TestCase):
    """Test the combined runner and its report."""

    def test_01_minimum_trials(self):
        with self.assertRaises(InvalidArgumentError):
            run_lemma_suites(trials=9_999)

    def test_02_report(self):
        reports = run_lemma_suites(trials=10_000, seed=5, rounder=biased_rounder)
        names = [r.name for r in reports]
        self.assertEqual(names, ["vote_error_bound", "soft_vote_unbiased", "rounding_error", "qsgd_error"])
        self.assertFalse(reports[1].passed)

        frame = report_frame(reports)
        self.assertEqual(list(frame.columns), ["suite", "case", "observed", "expected", "tolerance", "passed"])
        self.assertEqual(len(frame), sum(len(r.checks) for r in reports))
        text = format_report(reports)
        self.assertIn("soft_vote_unbiased: FAIL", text)
        self.assertIn("vote_error_bound: PASS", text)


if __name__ == "__main__":
    unittest.main(verbosity=2)
