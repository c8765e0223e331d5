"""Goodness-of-fit helpers with floored p-values."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

P_FLOOR = 1e-12


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float


def _floor(p: float) -> float:
    return max(float(p), P_FLOOR)


def ks_test(sample, cdf) -> TestResult:
    """One-sample Kolmogorov-Smirnov test (asymptotic p-value)."""
    sample = np.asarray(sample, dtype=float)
    if sample.size < 10:
        raise ValueError("KS test needs at least 10 observations")
    res = stats.kstest(sample, cdf, method="asymp")
    return TestResult(float(res.statistic), _floor(res.pvalue))


def chi_square(observed, expected) -> TestResult:
    """Pearson chi-square of counts against expected counts (rescaled to the same total)."""
    observed = np.asarray(observed, dtype=float)
    expected = np.asarray(expected, dtype=float)
    expected = expected * observed.sum() / expected.sum()
    if np.any(expected < 5):
        raise ValueError("expected counts below 5; run more replications")
    res = stats.chisquare(observed, expected)
    return TestResult(float(res.statistic), _floor(res.pvalue))


def chi_square_two_sample(counts_a, counts_b) -> TestResult:
    """Homogeneity test of two count vectors over the same categories."""
    table = np.array([counts_a, counts_b], dtype=float)
    table = table[:, table.sum(axis=0) > 0]
    exp = table.sum(axis=1, keepdims=True) * table.sum(axis=0) / table.sum()
    if np.any(exp < 5):
        raise ValueError("expected counts below 5; run more replications")
    stat, p, _, _ = stats.chi2_contingency(table, correction=False)
    return TestResult(float(stat), _floor(p))


def spearman(x, y) -> float:
    return float(stats.spearmanr(x, y).statistic)


def mean_stderr(x):
    x = np.asarray(x, dtype=float)
    return float(x.mean()), float(x.std(ddof=1) / np.sqrt(x.size))


def ratio_stderr(num, den):
    """Ratio of sums ``sum(num)/sum(den)`` over replications with a delta-method error."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    n = num.size
    r = num.sum() / den.sum()
    resid = num - r * den
    se = np.sqrt(np.sum(resid**2) / (n - 1) / n) / den.mean() if n > 1 else float("nan")
    return float(r), float(se)
