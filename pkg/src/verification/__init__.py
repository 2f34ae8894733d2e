"""
Monte-Carlo verification of the simulator's analytic properties.

This module provides:
- run_lemma_suites: vote-error bound, soft-vote unbiasedness, rounding and QSGD error checks
- verify_dimension_scaling: optional error-vs-dimension slope check
- report_frame / format_report: tabular and printable reports
"""

from src.verification.lemmas import (
    DEFAULT_TRIALS,
    MIN_TRIALS,
    CheckResult,
    SuiteReport,
    format_report,
    report_frame,
    run_lemma_suites,
    verify_dimension_scaling,
    verify_qsgd_error,
    verify_rounding_error,
    verify_soft_vote_unbiased,
    verify_vote_error_bound,
)

__all__ = [
    'DEFAULT_TRIALS',
    'MIN_TRIALS',
    'CheckResult',
    'SuiteReport',
    'format_report',
    'report_frame',
    'run_lemma_suites',
    'verify_dimension_scaling',
    'verify_qsgd_error',
    'verify_rounding_error',
    'verify_soft_vote_unbiased',
    'verify_vote_error_bound',
]
