"""
Monte-Carlo checks of the analytic properties the simulator relies on.

This module provides:
- CheckResult / SuiteReport: observed vs. expected values with a verdict
- verify_vote_error_bound: one-shot plurality error never exceeds its bound
- verify_soft_vote_unbiased: 2 * soft_vote - 1 averages to the clients' mean
- verify_rounding_error: stochastic-rounding error energy matches its closed form
- verify_qsgd_error: QSGD error energy matches its closed form and bound
- verify_dimension_scaling: error growth with d for rounding vs. QSGD
- run_lemma_suites / report_frame: all suites and a tabular report

Every suite draws from its own generator so results are reproducible per seed.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from src.errors import InvalidArgumentError
from src.quantize.error_bounds import (
    binary_quant_error_expectation,
    qsgd_error_bound,
    qsgd_error_expectation,
    ternary_quant_error_expectation,
)
from src.quantize.qsgd import qsgd_quantize
from src.quantize.rounding import QuantLevels, sto_round, sto_round_binary, sto_round_ternary
from src.vote.bounds import one_shot_error_bound
from src.vote.voting import VoteBatch, soft_vote

logger = logging.getLogger(__name__)

MIN_TRIALS = 10_000
DEFAULT_TRIALS = 100_000

VOTE_ERROR_S = (0.1, 0.2, 0.3, 0.4)
VOTE_ERROR_M = (5, 15, 45)
SCALING_DIMS = tuple(2 ** k for k in range(6, 15))


@dataclass
class CheckResult:
    """
    Attributes:
        case: What was checked (e.g. "s=0.1 M=5")
        observed: Monte-Carlo value
        expected: Analytic value or bound
        tolerance: Allowed deviation (0 for one-sided bounds)
        passed: Verdict
    """

    case: str
    observed: float
    expected: float
    tolerance: float
    passed: bool


@dataclass
class SuiteReport:
    name: str
    checks: List[CheckResult] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def add(self, case: str, observed: float, expected: float, tolerance: float, passed: bool):
        self.checks.append(CheckResult(case, float(observed), float(expected), float(tolerance), bool(passed)))


# =============================================================================
# Suites
# =============================================================================

def verify_vote_error_bound(trials: int, rng: np.random.Generator,
                            s_values: Sequence[float] = VOTE_ERROR_S,
                            m_values: Sequence[int] = VOTE_ERROR_M) -> SuiteReport:
    """
    Each of M voters is wrong independently with probability s; the
    empirical plurality error must stay below [2s e^(1-2s)]^(M/2).
    """
    report = SuiteReport("vote_error_bound")
    for s in s_values:
        for m in m_values:
            wrong_votes = rng.binomial(m, s, size=trials)
            wrong = (2 * wrong_votes > m).astype(float)
            ties = 2 * wrong_votes == m
            wrong[ties] = rng.integers(0, 2, size=int(ties.sum()))
            empirical = wrong.mean()
            bound = one_shot_error_bound(s, m)
            report.add(f"s={s} M={m}", empirical, bound, 0.0, empirical <= bound)
    report.notes.append(f"bound(s=0.1, M=10) = {one_shot_error_bound(0.1, 10):.6f}")
    return report


def verify_soft_vote_unbiased(vote_rounds: int, rng: np.random.Generator, rounder=sto_round,
                              client_count: int = 5, d: int = 64, sigmas: float = 4.0) -> SuiteReport:
    """
    Fix the clients' normalized weights, repeat rounding and soft voting
    ``vote_rounds`` times, and compare the mean of 2p - 1 (before clipping)
    with the clients' mean weight, coordinate by coordinate.

    ``rounder`` defaults to unbiased stochastic rounding; a biased one must fail.
    """
    report = SuiteReport("soft_vote_unbiased")
    weights = rng.uniform(-0.8, 0.8, size=(client_count, d))
    target = weights.mean(axis=0)
    total = np.zeros(d)
    for _ in range(vote_rounds):
        payloads = [rounder(w, QuantLevels.BINARY, rng) for w in weights]
        total += 2.0 * soft_vote(VoteBatch.from_payloads(payloads)) - 1.0
    observed = total / vote_rounds
    sigma = np.sqrt(np.sum(1.0 - weights ** 2, axis=0)) / client_count / np.sqrt(vote_rounds)
    z = np.abs(observed - target) / sigma
    worst = int(np.argmax(z))
    report.add(
        f"worst coordinate {worst} of {d} ({vote_rounds} rounds, M={client_count})",
        observed[worst], target[worst], sigmas * sigma[worst], bool(np.all(z <= sigmas)),
    )
    report.notes.append(f"max |z| = {z.max():.2f}")
    return report


def verify_rounding_error(trials: int, rng: np.random.Generator, vector_count: int = 20,
                          d: int = 16, rel_tol: float = 0.02) -> SuiteReport:
    """
    Mean squared rounding error over ``trials`` roundings against
    d - ||a||^2 (binary) and ||a||_1 - ||a||^2 (ternary).
    """
    report = SuiteReport("rounding_error")
    for index in range(vector_count):
        a = rng.uniform(-1.0, 1.0, size=d)
        tiled = np.tile(a, trials)
        for levels, rounding, expectation in (
            (QuantLevels.BINARY, sto_round_binary, binary_quant_error_expectation),
            (QuantLevels.TERNARY, sto_round_ternary, ternary_quant_error_expectation),
        ):
            error = rounding(tiled, rng).values.astype(float) - tiled
            observed = float(np.sum(error ** 2)) / trials
            expected = expectation(a)
            tolerance = rel_tol * expected
            report.add(f"{levels.value} vector {index}", observed, expected, tolerance,
                       abs(observed - expected) <= tolerance)
    return report


def _qsgd_error_energy(x: np.ndarray, draws: int, rng: np.random.Generator,
                       chunk_entries: int = 1 << 20) -> float:
    """Mean squared QSGD error of ``x`` over ``draws`` independent quantizations."""
    rows = max(1, chunk_entries // x.size)
    total, done = 0.0, 0
    while done < draws:
        count = min(rows, draws - done)
        stacked = np.tile(x, (count, 1))
        total += float(np.sum((qsgd_quantize(stacked, rng) - stacked) ** 2))
        done += count
    return total / draws


def verify_qsgd_error(trials: int, rng: np.random.Generator, bound_dims: Sequence[int] = (4, 64, 1024),
                      vector_count: int = 20, bound_entries: int = 10_000_000,
                      bound_slack: float = 0.02) -> SuiteReport:
    """
    QSGD error energy for x = [3, 4] must be 10 +- 0.3, and for
    ``vector_count`` Gaussian x per dimension the Monte-Carlo error energy
    must stay within (sqrt(d) - 1) ||x||^2 * (1 + bound_slack).

    Each bound check uses ``min(trials, bound_entries // d)`` draws.
    """
    report = SuiteReport("qsgd_error")
    x = np.array([3.0, 4.0])
    observed = _qsgd_error_energy(x, trials, rng)
    expected = qsgd_error_expectation(x)
    report.add("x=[3, 4]", observed, expected, 0.3, abs(observed - expected) <= 0.3)

    for d in bound_dims:
        draws = max(1, min(trials, bound_entries // d))
        for index in range(vector_count):
            x = rng.normal(size=d)
            energy = _qsgd_error_energy(x, draws, rng)
            bound = qsgd_error_bound(x)
            report.add(f"bound d={d} vector {index}", energy, bound, bound * bound_slack,
                       energy <= bound * (1.0 + bound_slack) and qsgd_error_expectation(x) <= bound)
    return report


def _log_slope(dims: Sequence[int], values: Sequence[float]) -> float:
    return float(np.polyfit(np.log(dims), np.log(values), 1)[0])


def verify_dimension_scaling(rng: np.random.Generator, dims: Sequence[int] = SCALING_DIMS,
                             draws: int = 50, tolerance: float = 0.15) -> SuiteReport:
    """
    Log-log slope of error energy against d: about 1.0 for stochastic
    rounding of Beta-distributed probabilities, about 1.5 for QSGD of
    Gaussian vectors.
    """
    report = SuiteReport("dimension_scaling")
    rounding_errors, qsgd_errors = [], []
    for d in dims:
        a = 2.0 * rng.beta(2.0, 2.0, size=d) - 1.0
        tiled = np.tile(a, draws)
        diff = sto_round_binary(tiled, rng).values.astype(float) - tiled
        rounding_errors.append(float(np.sum(diff ** 2)) / draws)

        x = rng.normal(size=d)
        qsgd_errors.append(_qsgd_error_energy(x, draws, rng))

    for label, errors, target in (("stochastic rounding", rounding_errors, 1.0), ("qsgd", qsgd_errors, 1.5)):
        slope = _log_slope(dims, errors)
        report.add(f"{label} slope over d={dims[0]}..{dims[-1]}", slope, target, tolerance,
                   abs(slope - target) <= tolerance)
    return report


# =============================================================================
# Entry points
# =============================================================================

def run_lemma_suites(trials: int = DEFAULT_TRIALS, seed: int = 0, scaling: bool = False,
                     rounder=sto_round) -> List[SuiteReport]:
    """
    Run every suite with generators spawned from ``seed``.

    Args:
        trials: Monte-Carlo trials per check (at least 10^4); the soft-vote
            suite runs trials / 10 vote rounds
        seed: Seed of the suites' generators
        scaling: Also run the dimension-scaling suite
        rounder: Rounding used by the soft-vote suite

    Raises:
        InvalidArgumentError: If trials < 10^4
    """
    if trials < MIN_TRIALS:
        raise InvalidArgumentError(f"trials must be at least {MIN_TRIALS}, got {trials}")
    streams = np.random.SeedSequence(seed).spawn(5)
    rngs = [np.random.default_rng(s) for s in streams]
    reports = [
        verify_vote_error_bound(trials, rngs[0]),
        verify_soft_vote_unbiased(trials // 10, rngs[1], rounder=rounder),
        verify_rounding_error(trials, rngs[2]),
        verify_qsgd_error(trials, rngs[3]),
    ]
    if scaling:
        reports.append(verify_dimension_scaling(rngs[4]))
    for report in reports:
        logger.info(f"{report.name}: {'PASS' if report.passed else 'FAIL'} ({len(report.checks)} checks)")
    return reports


def report_frame(reports: Sequence[SuiteReport]) -> pd.DataFrame:
    """One row per check: suite, case, observed, expected, tolerance, passed."""
    rows = [
        {"suite": r.name, "case": c.case, "observed": c.observed, "expected": c.expected,
         "tolerance": c.tolerance, "passed": c.passed}
        for r in reports for c in r.checks
    ]
    return pd.DataFrame(rows, columns=["suite", "case", "observed", "expected", "tolerance", "passed"])


def format_report(reports: Sequence[SuiteReport], verbose: Optional[bool] = False) -> str:
    """Per-suite PASS/FAIL lines, each followed by its checks when failing or verbose."""
    lines = []
    frame = report_frame(reports)
    for report in reports:
        lines.append(f"{report.name}: {'PASS' if report.passed else 'FAIL'}")
        for note in report.notes:
            lines.append(f"  {note}")
        rows = frame[frame["suite"] == report.name]
        if verbose or not report.passed:
            lines.extend("  " + line for line in rows.drop(columns="suite").to_string(index=False).splitlines())
    return "\n".join(lines)
