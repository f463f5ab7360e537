"""Total-variation distance between the two marginal walk laws.

Each coordinate of a walk flips at rate one, independently of the rest,
so the law of the walk at time t is a product measure: a coordinate
disagrees with its start with probability p = (1 - exp(-2t)) / 2.  Two
walks started k coordinates apart therefore have marginal laws that are
product-Bernoulli measures differing in k factors, and the matched
factors cancel exactly.  The TV distance reduces to a single binomial
sum, evaluated in log space with the absolute value split analytically
at the crossover weight w = k/2 so that no cancelling pair is summed.

The TV curve lower-bounds every coupling's tail, which makes it the
yardstick for how far from maximal the optimal co-adapted coupling is:
its tail matches TV exactly at k = 1 and 2 and lags behind by roughly a
factor of two in time for k = n large.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytic import vhat, vhat_level_time

__all__ = ["tv", "coupling_gap", "half_mixing_time", "expected_tau_hat",
           "TvCurve", "tv_curve", "nonmaximality_ratio"]


def tv(k: int, t: float) -> float:
    """TV distance between walk laws started k coordinates apart."""
    k = int(k)
    if k < 0:
        raise ValueError("k must be >= 0")
    t = float(t)
    if t < 0.0:
        raise ValueError("t must be >= 0")
    if k == 0:
        return 0.0
    x = math.exp(-2.0 * t)
    if x >= 1.0:
        return 1.0
    log_p = math.log1p(-x) - math.log(2.0)  # p = (1 - x) / 2
    log_q = math.log1p(x) - math.log(2.0)   # q = 1 - p
    lgk = math.lgamma(k + 1)
    terms = []
    for w in range((k + 1) // 2):  # strictly below the crossover k/2
        lc = lgk - math.lgamma(w + 1) - math.lgamma(k - w + 1)
        hi = math.exp(lc + w * log_p + (k - w) * log_q)
        lo = math.exp(lc + (k - w) * log_p + w * log_q)
        terms.append(hi - lo)
    return min(1.0, math.fsum(terms))


def coupling_gap(k: int, t: float) -> tuple[float, float, float]:
    """(tv, tail, tail - tv) of the optimal coupling at (k, t).

    The gap is nonnegative (the coupling inequality) and vanishes at
    k = 1 and k = 2, where the optimal co-adapted coupling is maximal.
    """
    tv_val = tv(k, t)
    v_val = vhat(k, t)
    return tv_val, v_val, v_val - tv_val


def half_mixing_time(n: int, k: int, level: float, tol: float = 1e-9) -> float:
    """Time at which the TV distance from mismatch k falls to ``level``."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie strictly between 0 and 1")
    if not 1 <= k <= n:
        raise ValueError(f"require 1 <= k <= n, got k={k}, n={n}")
    lo, hi = 0.0, 1.0
    while tv(k, hi) > level:
        lo, hi = hi, 2.0 * hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if tv(k, mid) > level:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def expected_tau_hat(k: int) -> float:
    """Exact mean coupling time of the pair-matching control from k.

    Half the m-th harmonic number for k = 2m, plus the initial
    1 / (4m + 2) hold for k = 2m + 1.  Grows like log(k) / 2.
    """
    k = int(k)
    if k < 0:
        raise ValueError("k must be >= 0")
    m, odd = divmod(k, 2)
    mean = 0.5 * math.fsum(1.0 / i for i in range(1, m + 1))
    if odd:
        mean += 1.0 / (4.0 * m + 2.0)
    return mean


@dataclass
class TvCurve:
    """Sampled TV decay curve for one start distance."""

    n: int
    k: int
    samples: list[tuple[float, float]]  # (t, tv)


def tv_curve(n: int, k: int, t_grid) -> TvCurve:
    return TvCurve(n, k, [(float(t), tv(k, t)) for t in np.asarray(t_grid)])


def nonmaximality_ratio(k: int, level: float = 0.5) -> tuple[float, float, float]:
    """(t at which the coupling tail hits level, t at which TV does, ratio).

    The ratio measures how far the optimal co-adapted coupling is from a
    maximal one; for k = n large it approaches two.
    """
    t_tail = vhat_level_time(k, level)
    t_tv = half_mixing_time(k, k, level)
    return t_tail, t_tv, t_tail / t_tv
