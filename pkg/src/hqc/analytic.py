"""Closed-form coupling-time law and its optimality certificates.

Under the pair-matching control the mismatch count performs a pure
death ladder: from an odd count k it drops to k - 1 at rate 2k, from an
even count k to k - 2 at rate k.  The absorption time started at k is
therefore a sum of independent exponentials with distinct rates
{2, 4, ..., 2m} for k = 2m and {2, 4, ..., 2m, 4m + 2} for k = 2m + 1.

For even k the sum telescopes to the maximum of m independent rate-2
exponentials, giving the tail 1 - (1 - exp(-2t))**m.  For odd k one
extra hold at rate 4m + 2 is convolved in; expanding the convolution
integral gives a sum with all-positive terms.  Both forms are evaluated
in log space, so tails stay accurate for k in the hundreds where naive
partial fractions lose all precision to cancellation (the alternating
coefficients grow like binomial(m, m/2)).

The module also evaluates the Laplace transform of the tail in product
form, the resulting transform identities, the parity inequalities that
decide when full-rate single jumps beat pair jumps, and the linear-program
certificate that no admissible five-band rate vector improves on the
pair-matching control.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

__all__ = [
    "vhat", "vhat_dt", "vhat_level_time", "HypoexpLaw", "hypoexp_rates",
    "hypoexp_law", "phi_alpha", "V_alpha", "D_alpha",
    "check_laplace_identities", "theta", "parity_gap", "LambdaVector",
    "LnConstraintError", "optimal_lambda", "generator_apply", "MaxResult",
    "maximize_over_Ln", "bellman_residual",
]

#: partial-fraction tails are only exposed up to this k; far below it the
#: alternating coefficients already cost digits (see HypoexpLaw docs).
PARTIAL_FRACTION_MAX_K = 300


def _check_t(t: float) -> float:
    t = float(t)
    if not t >= 0.0:
        raise ValueError(f"time must be nonnegative, got {t!r}")
    return t


@lru_cache(maxsize=2048)
def _log_binom_row(m: int) -> np.ndarray:
    """log of binomial(m, j) for j = 0..m."""
    lg = math.lgamma(m + 1)
    j = np.arange(m + 1)
    lgj = np.array([math.lgamma(v + 1) for v in range(m + 1)])
    return lg - lgj - lgj[::-1]


def _odd_boost(m: int, t: float) -> float:
    """Tail excess of the odd start 2m + 1 over the even start 2m.

    Equals P(tau > t) - P(max of m rate-2 exponentials > t) where tau
    adds an independent rate-(4m + 2) hold to that maximum.  All terms
    of the expanded convolution are positive, and every exponent is
    nonpositive, so the log-space sum is stable for any m and t.
    """
    if m == 0:
        return math.exp(-2.0 * t)
    x = math.exp(-2.0 * t)
    if x >= 1.0 or t == 0.0:
        return 0.0
    big_l = 2.0 * t + math.log1p(-x)  # log(exp(2t) - 1)
    j = np.arange(m + 1)
    expo = (math.log(m) + _log_binom_row(m) + (m + j) * big_l
            - (4.0 * m + 2.0) * t - np.log(m + j))
    return float(math.fsum(np.exp(expo)))


def vhat(k: int, t: float) -> float:
    """Tail probability that coupling from mismatch count k takes > t.

    Zero for k <= 0 by convention.  Nondecreasing in k, with equality
    exactly between k = 1 and k = 2 (both are a single rate-2 hold).
    """
    t = _check_t(t)
    k = int(k)
    if k <= 0:
        return 0.0
    if t == 0.0:
        return 1.0
    x = math.exp(-2.0 * t)
    if x >= 1.0:
        return 1.0
    m, odd = divmod(k, 2)
    if not odd:
        if m == 1:
            return x
        return -math.expm1(m * math.log1p(-x))
    if m == 0:
        return x
    return -math.expm1(m * math.log1p(-x)) + _odd_boost(m, t)


def vhat_dt(k: int, t: float) -> float:
    """Time derivative of the tail: minus the coupling-time density."""
    t = _check_t(t)
    k = int(k)
    if k <= 0:
        return 0.0
    if t == 0.0 or math.exp(-2.0 * t) >= 1.0:
        return -2.0 if k in (1, 2) else 0.0
    m, odd = divmod(k, 2)
    if not odd:
        x = math.exp(-2.0 * t)
        return -math.exp(math.log(2.0 * m) - 2.0 * t
                         + (m - 1) * math.log1p(-x))
    if m == 0:
        return -2.0 * math.exp(-2.0 * t)
    return -(4.0 * m + 2.0) * _odd_boost(m, t)


def vhat_level_time(k: int, level: float, tol: float = 1e-9) -> float:
    """Time at which the tail from mismatch count k crosses ``level``."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie strictly between 0 and 1")
    if k <= 0:
        raise ValueError("k must be >= 1 for a crossing time")
    lo, hi = 0.0, 1.0
    while vhat(k, hi) > level:
        lo, hi = hi, 2.0 * hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if vhat(k, mid) > level:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Exact law object: distinct rates plus partial-fraction coefficients.

def hypoexp_rates(k: int) -> np.ndarray:
    """Rates of the absorption ladder started at mismatch count k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    m, odd = divmod(k, 2)
    rates = [2.0 * i for i in range(1, m + 1)]
    if odd:
        rates.append(4.0 * m + 2.0)
    return np.asarray(rates)


@dataclass(frozen=True)
class HypoexpLaw:
    """Sum of independent exponentials with distinct rates.

    ``tail(t)`` evaluates sum(coeffs * exp(-rates * t)).  The partial
    fraction coefficients alternate in sign and grow combinatorially, so
    in double precision this representation is only trustworthy for
    small k (roughly k <= 60); use :func:`vhat` for the production tail.
    """

    k: int
    rates: np.ndarray
    coeffs: np.ndarray

    def tail(self, t: float) -> float:
        return float(np.dot(self.coeffs, np.exp(-self.rates * _check_t(t))))

    def density(self, t: float) -> float:
        return float(np.dot(self.coeffs * self.rates,
                            np.exp(-self.rates * _check_t(t))))

    def mean(self) -> float:
        return float(np.sum(1.0 / self.rates))


def hypoexp_law(k: int) -> HypoexpLaw:
    """Partial-fraction form of the coupling-time law started at k."""
    if not 1 <= k <= PARTIAL_FRACTION_MAX_K:
        raise ValueError(
            f"k must be in 1..{PARTIAL_FRACTION_MAX_K} for the "
            "partial-fraction law; use vhat for larger k")
    rates = hypoexp_rates(k)
    coeffs = np.empty_like(rates)
    for i, ri in enumerate(rates):
        others = np.delete(rates, i)
        coeffs[i] = np.prod(others / (others - ri))
    return HypoexpLaw(k, rates, coeffs)


# ---------------------------------------------------------------------------
# Laplace transforms of the tail and the parity identities they satisfy.

def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha!r}")
    return alpha


def phi_alpha(m: int, alpha: float) -> float:
    """Product of 2i / (2i + alpha) over i = 1..m (empty product = 1)."""
    alpha = _check_alpha(alpha)
    out = 1.0
    for i in range(1, m + 1):
        out *= 2.0 * i / (2.0 * i + alpha)
    return out


def V_alpha(k: int, alpha: float) -> float:
    """Laplace transform of the tail: integral of exp(-alpha t) vhat(k, t)."""
    alpha = _check_alpha(alpha)
    if k <= 0:
        return 0.0
    m, odd = divmod(k, 2)
    if not odd:
        return (1.0 - phi_alpha(m, alpha)) / alpha
    ratio = 2.0 * (2 * m + 1) / (2.0 * (2 * m + 1) + alpha)
    return (1.0 - ratio * phi_alpha(m, alpha)) / alpha


def D_alpha(k: int, alpha: float) -> float:
    """Transform of the k-step tail increment: V_alpha(k) - V_alpha(k - 1)."""
    return V_alpha(k, alpha) - V_alpha(k - 1, alpha)


def check_laplace_identities(m: int, alpha: float) -> dict[str, float | None]:
    """Residuals of the five transform identities at index m.

    Keys: imp_V1, imp_V2, D_even, ident, D_odd.  All residuals vanish in
    exact arithmetic.  D_even and ident have a 1/(2m - 2) structure that
    degenerates at m = 1, where instead D_alpha(2) = 0 holds; they are
    reported as None there.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    alpha = _check_alpha(alpha)
    res: dict[str, float | None] = {}
    res["imp_V1"] = (1.0 - alpha * V_alpha(2 * m, alpha)
                     + 2.0 * m * (V_alpha(2 * m - 2, alpha)
                                  - V_alpha(2 * m, alpha)))
    res["imp_V2"] = (1.0 - alpha * V_alpha(2 * m - 1, alpha)
                     + 2.0 * (2 * m - 1) * (V_alpha(2 * m - 2, alpha)
                                            - V_alpha(2 * m - 1, alpha)))
    if m >= 2:
        res["D_even"] = (D_alpha(2 * m - 1, alpha) - D_alpha(2 * m, alpha)
                         - (2.0 + alpha) / (2.0 * m - 2.0)
                         * D_alpha(2 * m, alpha))
        res["ident"] = ((2.0 * m - 2.0) * D_alpha(2 * m - 1, alpha)
                        - (2.0 * m + alpha) * D_alpha(2 * m, alpha))
    else:
        res["D_even"] = None
        res["ident"] = None
    res["D_odd"] = (D_alpha(2 * m + 1, alpha) - D_alpha(2 * m, alpha)
                    - 2.0 / (4.0 * m + 2.0 + alpha)
                    * (D_alpha(2 * m - 1, alpha) - D_alpha(2 * m, alpha)))
    return res


def theta(m: int, t: float) -> float:
    """Tail excess of the even start 2m over the odd start 2m - 1.

    Difference of two sums of exponentials that share their first m - 1
    holds: the even start finishes with a rate-2m hold, the odd one with
    a faster rate-(4m - 2) hold.  Strictly positive for t > 0 when
    m >= 2; identically zero at m = 1, where both laws coincide.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    t = _check_t(t)
    if t == 0.0:
        return 0.0
    x = math.exp(-2.0 * t)
    if x >= 1.0:
        return 0.0
    if m == 1:
        return x - _odd_boost(0, t)  # exactly 0.0: identical expressions
    lead = math.exp(-2.0 * t + (m - 1) * math.log1p(-x))
    return lead - _odd_boost(m - 1, t)


def parity_gap(k: int, t: float) -> float:
    """2[vhat(k) - vhat(k-1)] - [vhat(k) - vhat(k-2)] at time t.

    Positive when full-rate single jumps are the better use of the
    mismatch budget (odd k), negative when pair jumps are (even k).
    Evaluated from the single-step tail increments so the sign survives
    rounding even where the raw tails are all within one ulp of 1.
    """
    k = int(k)
    t = _check_t(t)
    if k < 1:
        raise ValueError("k must be >= 1")
    m, odd = divmod(k, 2)
    if odd:
        # d(k) - d(k - 1), with d(2m + 1) the odd boost at m
        if m == 0:
            return vhat(1, t)
        return _odd_boost(m, t) - theta(m, t)
    # d(2m) - d(2m - 1) = theta(m) - boost(m - 1)
    return theta(m, t) - _odd_boost(m - 1, t)


# ---------------------------------------------------------------------------
# Five-band generator, admissible rate polytope, and its exact maximizer.

class LnConstraintError(ValueError):
    """A rate vector violates the admissible polytope."""


@dataclass(frozen=True)
class LambdaVector:
    """Rates at which the mismatch count k moves to k + m, m in -2..2."""

    k: int
    n: int
    down2: float
    down1: float
    stay: float
    up1: float
    up2: float

    def as_dict(self) -> dict[int, float]:
        return {-2: self.down2, -1: self.down1, 0: self.stay,
                1: self.up1, 2: self.up2}

    def validate(self, tol: float = 1e-9) -> None:
        for name, v in (("down2", self.down2), ("down1", self.down1),
                        ("stay", self.stay), ("up1", self.up1),
                        ("up2", self.up2)):
            if v < -tol:
                raise LnConstraintError(
                    f"rate {name} = {v:.17g} is negative")
        cap = self.down2 + 0.5 * self.down1
        if cap > self.k + tol:
            raise LnConstraintError(
                f"down2 + down1/2 = {cap:.17g} exceeds k = {self.k}")
        total = cap + self.stay + 0.5 * self.up1 + self.up2
        if abs(total - self.n) > tol:
            raise LnConstraintError(
                f"weighted rate total {total:.17g} != n = {self.n}")


def optimal_lambda(k: int, n: int | None = None) -> LambdaVector:
    """Rate vector of the pair-matching control at mismatch count k."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if n is None:
        n = k
    if k > n:
        raise ValueError(f"k = {k} exceeds n = {n}")
    if k == 0:
        return LambdaVector(0, n, 0.0, 0.0, float(n), 0.0, 0.0)
    if k % 2 == 1:
        return LambdaVector(k, n, 0.0, 2.0 * k, float(n - k), 0.0, 0.0)
    return LambdaVector(k, n, float(k), 0.0, float(n - k), 0.0, 0.0)


def generator_apply(lam: LambdaVector, t: float) -> float:
    """Expected instantaneous drift of the tail under the rate vector.

    sum over m of lam(k, k + m) [vhat(k + m, t) - vhat(k, t)].
    """
    lam.validate()
    k = lam.k
    vk = vhat(k, t)
    out = 0.0
    for m, rate in lam.as_dict().items():
        if m != 0 and rate != 0.0:
            out += rate * (vhat(k + m, t) - vk)
    return out


@dataclass
class MaxResult:
    """Outcome of maximizing the drift objective over the polytope."""

    lam_star: LambdaVector
    value: float
    vertices: list[tuple[float, float, float, float, float]]
    unique: bool


@lru_cache(maxsize=4096)
def _polytope_vertices(k: int, n: int) -> tuple[tuple[Fraction, ...], ...]:
    """Vertices of the admissible rate polytope, exactly.

    Variables (down2, down1, stay, up1, up2, slack) >= 0 subject to
    down2 + down1/2 + slack = k and the weighted total = n.  Basic
    feasible solutions have at most two nonzero variables.
    """
    half = Fraction(1, 2)
    r1 = (Fraction(1), half, Fraction(0), Fraction(0), Fraction(0),
          Fraction(1))
    r2 = (Fraction(1), half, Fraction(1), half, Fraction(1), Fraction(0))
    rhs1, rhs2 = Fraction(k), Fraction(n)
    zero = tuple(Fraction(0) for _ in range(6))
    found: set[tuple[Fraction, ...]] = set()

    def record(vals: dict[int, Fraction]):
        point = list(zero)
        for idx, v in vals.items():
            if v < 0:
                return
            point[idx] = v
        # verify both equalities (guards single-variable bases)
        if (sum(r1[i] * point[i] for i in range(6)) == rhs1
                and sum(r2[i] * point[i] for i in range(6)) == rhs2):
            found.add(tuple(point))

    for i in range(6):
        for eq_c, eq_r in ((r1, rhs1), (r2, rhs2)):
            if eq_c[i] != 0:
                record({i: eq_r / eq_c[i]})
    for i in range(6):
        for j in range(i + 1, 6):
            det = r1[i] * r2[j] - r1[j] * r2[i]
            if det == 0:
                continue
            xi = (rhs1 * r2[j] - rhs2 * r1[j]) / det
            xj = (r1[i] * rhs2 - r2[i] * rhs1) / det
            record({i: xi, j: xj})
    return tuple(sorted(found))


def maximize_over_Ln(k: int, t: float, n: int) -> MaxResult:
    """Maximize sum_m lam(k, k+m) [vhat(k,t) - vhat(k+m,t)] over the polytope.

    Enumerates the basic feasible points of the five-variable polytope in
    exact rational arithmetic and evaluates the linear objective at each.
    The reported maximizer is the pair-matching vertex: all upward rates
    zero, the downward budget saturated, and the single-jump rate 2k
    exactly when k is odd (for t > 0).  At k = 1 the upward coefficient
    vanishes because the tails at mismatch 1 and 2 coincide, so the
    argmax is a face rather than a point and ``unique`` is False.
    """
    if not 1 <= k <= n:
        raise ValueError(f"require 1 <= k <= n, got k={k}, n={n}")
    t = _check_t(t)
    vk = vhat(k, t)
    w = (vk - vhat(k - 2, t), vk - vhat(k - 1, t), 0.0,
         vk - vhat(k + 1, t), vk - vhat(k + 2, t), 0.0)
    verts = _polytope_vertices(k, n)
    best = -math.inf
    values = []
    for v in verts:
        val = math.fsum(float(v[i]) * w[i] for i in range(6) if w[i] != 0.0)
        values.append(val)
        best = max(best, val)
    tol = 1e-9 * max(1.0, abs(best))
    optimal = [tuple(float(c) for c in v[:5])
               for v, val in zip(verts, values) if val >= best - tol]
    if k % 2 == 1 and t == 0.0 and k != 1:
        # at t = 0 the single-jump advantage vanishes; fall back to pairs
        lam_star = LambdaVector(k, n, float(k), 0.0, float(n - k), 0.0, 0.0)
    else:
        lam_star = optimal_lambda(k, n)
    return MaxResult(lam_star, best, optimal, len(optimal) == 1)


def bellman_residual(k: int, t: float) -> float:
    """|drift of the tail under the pair-matching rates - d vhat / dt|.

    Vanishes identically: the tail solves its own backward equation, so
    the residual measures only the floating error of the two evaluation
    paths (the five-band generator sum versus the direct density).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    lam = optimal_lambda(k)
    return abs(generator_apply(lam, t) - vhat_dt(k, t))
