"""Empirical-tail summaries and distribution-comparison statistics."""

from __future__ import annotations

import math

import numpy as np


def empirical_tail(samples: np.ndarray, t_grid: np.ndarray) -> np.ndarray:
    """P(sample > t) for each grid t; censored samples are +inf."""
    s = np.sort(np.asarray(samples, dtype=np.float64))
    idx = np.searchsorted(s, np.asarray(t_grid, dtype=np.float64),
                          side="right")
    return 1.0 - idx / s.size


def normal_halfwidth(p: np.ndarray, n: int, z: float = 1.959963984540054
                     ) -> np.ndarray:
    """Pointwise 95% half-width of a binomial proportion (normal approx)."""
    p = np.asarray(p, dtype=np.float64)
    return z * np.sqrt(np.maximum(p * (1.0 - p), 0.0) / n)


def dkw_epsilon(n: int, delta: float = 0.01) -> float:
    """Simultaneous band half-width: sup-norm deviation of an empirical
    CDF from the truth exceeds this with probability at most delta."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must be in (0, 1)")
    return math.sqrt(math.log(2.0 / delta) / (2.0 * n))


def ks_statistic(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample Kolmogorov-Smirnov statistic."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_critical(n1: int, n2: int, alpha: float = 0.01) -> float:
    """Asymptotic two-sample KS rejection threshold at level alpha."""
    c = math.sqrt(-math.log(alpha / 2.0) / 2.0)
    return c * math.sqrt((n1 + n2) / (n1 * n2))
