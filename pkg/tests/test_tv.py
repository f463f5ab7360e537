"""Total-variation distance, coupling inequality, and the maximality gap.

The oracle for the TV value is exhaustive enumeration of the two
product measures over {0,1}^k, feasible up to k = 12.
"""

import itertools
import math

import numpy as np
import pytest

from hqc.analytic import vhat, vhat_level_time
from hqc.tv import (coupling_gap, expected_tau_hat, half_mixing_time,
                    nonmaximality_ratio, tv, tv_curve)

LOG_GRID = np.geomspace(1e-3, 20.0, 50)


def tv_exhaustive(k: int, t: float) -> float:
    """Brute-force TV between the two product-Bernoulli laws."""
    p = (1.0 - math.exp(-2.0 * t)) / 2.0
    q = 1.0 - p
    total = 0.0
    for z in itertools.product((0, 1), repeat=k):
        w = sum(z)
        px = p ** w * q ** (k - w)        # X started at all-zeros
        py = p ** (k - w) * q ** w        # Y started at all-ones
        total += abs(px - py)
    return 0.5 * total


class TestTv:
    def test_exhaustive_oracle(self):
        for k in range(1, 13):
            for t in (0.01, 0.1, 0.5, 1.0, 2.5):
                assert tv(k, t) == pytest.approx(tv_exhaustive(k, t),
                                                 abs=1e-12)

    def test_single_mismatch_decays_at_rate_two(self):
        for t in (0.0, 0.2, 1.0, 5.0, 20.0):
            assert tv(1, t) == pytest.approx(math.exp(-2.0 * t), abs=1e-14)

    def test_two_mismatches_equal_the_optimal_tail(self):
        for t in LOG_GRID:
            assert abs(tv(2, float(t)) - vhat(2, float(t))) <= 1e-12

    def test_disjoint_supports_at_time_zero(self):
        for k in (1, 2, 7, 100):
            assert tv(k, 0.0) == 1.0

    def test_no_mismatch_no_distance(self):
        assert tv(0, 1.0) == 0.0

    def test_monotone_in_t(self):
        for k in (1, 3, 10, 100):
            vals = [tv(k, float(t)) for t in LOG_GRID]
            assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))
            assert all(0.0 <= v <= 1.0 for v in vals)

    def test_validation(self):
        with pytest.raises(ValueError):
            tv(-1, 1.0)
        with pytest.raises(ValueError):
            tv(1, -1.0)


class TestCouplingInequality:
    def test_tv_below_tail_everywhere(self):
        ks = list(range(1, 21)) + [50, 100, 200, 300, 1024]
        for k in ks:
            for t in LOG_GRID:
                tv_val, v_val, gap = coupling_gap(k, float(t))
                assert tv_val <= v_val + 1e-12

    def test_equality_at_one_and_two(self):
        for k in (1, 2):
            for t in LOG_GRID:
                _, _, gap = coupling_gap(k, float(t))
                assert abs(gap) <= 1e-12

    def test_strict_gap_at_k8(self):
        tv_val, v_val, gap = coupling_gap(8, 1.0)
        # oracle: direct evaluation of both closed forms
        assert v_val == pytest.approx(vhat(8, 1.0), abs=1e-15)
        assert tv_val == pytest.approx(tv_exhaustive(8, 1.0), abs=1e-12)
        assert gap > 0.01


class TestHalfMixingTime:
    def test_single_coordinate_half_life(self):
        t_star = half_mixing_time(1, 1, 0.5)
        assert t_star == pytest.approx(0.5 * math.log(2.0), abs=1e-8)
        assert t_star == pytest.approx(0.34657359, abs=1e-7)

    def test_cutoff_location_at_n1024(self):
        t_star = half_mixing_time(1024, 1024, 0.5)
        predicted = 0.25 * math.log(1024.0)
        assert abs(t_star / predicted - 1.0) < 0.15

    def test_level_near_one_gives_tiny_time(self):
        ts = [half_mixing_time(4, 4, level)
              for level in (0.9, 0.99, 0.999, 0.9999)]
        assert all(a > b for a, b in zip(ts, ts[1:]))
        assert ts[-1] < 5e-3

    def test_is_a_root(self):
        t_star = half_mixing_time(16, 16, 0.3)
        assert tv(16, t_star) == pytest.approx(0.3, abs=1e-7)

    def test_validation(self):
        with pytest.raises(ValueError):
            half_mixing_time(4, 4, 0.0)
        with pytest.raises(ValueError):
            half_mixing_time(4, 5, 0.5)


class TestExpectedTau:
    def test_known_values(self):
        assert expected_tau_hat(4) == pytest.approx(0.75, abs=1e-15)
        assert expected_tau_hat(3) == pytest.approx(2.0 / 3.0, abs=1e-15)
        assert expected_tau_hat(0) == 0.0
        assert expected_tau_hat(1) == pytest.approx(0.5, abs=1e-15)
        assert expected_tau_hat(2) == pytest.approx(0.5, abs=1e-15)

    def test_half_log_growth(self):
        prev = 0.0
        for n in (2 ** 6, 2 ** 8, 2 ** 10, 2 ** 12, 2 ** 14):
            ratio = expected_tau_hat(n) / (0.5 * math.log(n))
            assert 0.9 <= ratio <= 1.05
            assert ratio > prev
            prev = ratio

    def test_validation(self):
        with pytest.raises(ValueError):
            expected_tau_hat(-1)


class TestNonMaximality:
    def test_ratio_near_two_at_n1024(self):
        t_tail, t_tv, ratio = nonmaximality_ratio(1024)
        assert 1.5 <= ratio <= 2.5
        assert t_tail == pytest.approx(vhat_level_time(1024, 0.5), abs=1e-8)

    def test_no_gap_for_two_mismatches(self):
        _, _, ratio = nonmaximality_ratio(2)
        assert ratio == pytest.approx(1.0, abs=1e-6)


class TestTvCurve:
    def test_samples_match_pointwise(self):
        grid = np.linspace(0.0, 2.0, 9)
        curve = tv_curve(6, 3, grid)
        assert curve.n == 6 and curve.k == 3
        for (t, v) in curve.samples:
            assert v == tv(3, t)
