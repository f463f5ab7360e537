"""Acceptance suite: one test per criterion, each printing PASS or FAIL.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines and
timings.  Every tolerance is pinned here; the Monte Carlo criteria use
fixed seeds and are exactly reproducible.
"""

import math
import time

import numpy as np

from hqc import stats
from hqc.analytic import (D_alpha, bellman_residual, check_laplace_identities,
                          maximize_over_Ln, parity_gap, vhat)
from hqc.engine import sample_coupling_taus, sample_parity_chain
from hqc.strategy import ParametricStrategy
from hqc.tv import coupling_gap, expected_tau_hat, nonmaximality_ratio
from hqc.verify import (battery_strategies, check_dominance,
                        check_marginals, default_t_grid)


def report(num: int, ok: bool, detail: str):
    print(f"[criterion {num}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


class TestAcceptance:
    def test_c1_exact_law_agreement(self):
        start = time.perf_counter()
        grid = np.geomspace(0.01, 10.0, 50)
        taus = sample_coupling_taus(10, 10, ParametricStrategy.optimal(10),
                                    100_000, seed=42, t_max=10.0)
        tail = stats.empirical_tail(taus, grid)
        exact = np.array([vhat(10, t) for t in grid])
        eps = stats.dkw_epsilon(100_000, delta=0.01)
        dev = float(np.max(np.abs(tail - exact)))
        elapsed = time.perf_counter() - start
        ok = dev < eps and elapsed < 30.0
        report(1, ok, f"sup|empirical-exact| = {dev:.5f} < band {eps:.5f}, "
                      f"{elapsed:.1f}s (< 30s, single-threaded)")

    def test_c2_lumping_equivalence(self):
        worst = 0.0
        crit = stats.ks_critical(100_000, 100_000, alpha=0.01)
        strat = ParametricStrategy.optimal(10)
        for idx, k0 in enumerate((3, 6, 10)):
            bit = sample_coupling_taus(10, k0, strat, 100_000, seed=1000,
                                       t_max=100.0,
                                       stream0=2 * idx * 100_000)
            ladder = sample_parity_chain(k0, 100_000, seed=1000,
                                         stream0=(2 * idx + 1) * 100_000)
            worst = max(worst, stats.ks_statistic(bit, ladder))
        ok = worst < crit
        report(2, ok, f"max two-sample KS = {worst:.5f} < 1% critical "
                      f"{crit:.5f} at k in (3, 6, 10)")

    def test_c3_stochastic_minimum(self):
        res = check_dominance(n=6, replicas=100_000, seed=7)
        ok = res.passed and res.seconds < 600.0
        report(3, ok,
               f"{res.params['strategies']} strategies x k0=1..6, "
               f"min margin {res.metric:+.5f} >= 0 above (tail - band), "
               f"{res.seconds:.0f}s (< 600s)")
        assert len(battery_strategies(6)) == 27

    def test_c4_laplace_identities(self):
        start = time.perf_counter()
        worst = 0.0
        alphas = (0.01, 0.1, 1.0, 10.0, 100.0)
        for m in range(1, 51):
            for a in alphas:
                for val in check_laplace_identities(m, a).values():
                    if val is not None:
                        worst = max(worst, abs(val))
        worst_d2 = max(abs(D_alpha(2, a)) for a in alphas)
        elapsed = time.perf_counter() - start
        ok = worst < 1e-10 and worst_d2 <= 1e-14 and elapsed < 1.0
        report(4, ok, f"max residual {worst:.2e} < 1e-10, "
                      f"|D(2)| {worst_d2:.2e} <= 1e-14, {elapsed:.2f}s (< 1s)")

    def test_c5_parity_signs(self):
        start = time.perf_counter()
        grid = default_t_grid()
        worst = 0.0
        for k in range(1, 101):
            sign = 1.0 if k % 2 == 1 else -1.0
            for t in grid:
                worst = max(worst, -sign * parity_gap(k, float(t)))
        elapsed = time.perf_counter() - start
        ok = worst <= 1e-12 and elapsed < 1.0
        report(5, ok, f"worst sign violation {worst:.2e} <= 1e-12 over "
                      f"k <= 100 x 50 log-spaced t, {elapsed:.2f}s (< 1s)")

    def test_c6_bellman_certification(self):
        grid = default_t_grid()
        worst_res = 0.0
        structure_ok = True
        k1_nonunique = True
        for k in range(1, 201):
            for t in grid:
                worst_res = max(worst_res, bellman_residual(k, float(t)))
            for t in (grid[0], grid[24], grid[-1]):
                res = maximize_over_Ln(k, float(t), k + 2)
                lam = res.lam_star
                if k >= 2 and (lam.up1 != 0.0 or lam.up2 != 0.0):
                    structure_ok = False
                if lam.down1 != (2.0 * k if k % 2 == 1 else 0.0):
                    structure_ok = False
                if lam.down2 + 0.5 * lam.down1 != float(k):
                    structure_ok = False
                if k == 1 and res.unique:
                    k1_nonunique = False
        ok = worst_res < 1e-9 and structure_ok and k1_nonunique
        report(6, ok,
               f"max Bellman residual {worst_res:.2e} < 1e-9 over k <= 200; "
               f"maximizer has no upward rates, down1 = 2k exactly iff k "
               f"odd; k = 1 argmax reported non-unique")

    def test_c7_marginal_correctness(self):
        res = check_marginals(n=8, horizon=1e4, seed=13)
        report(7, res.passed,
               f"per-coordinate flip rate within {res.metric:.2f} SE "
               f"(<= 3) of 1 for optimal/aldous/independent, n = 8, "
               f"horizon 1e4")

    def test_c8_mean_coupling_time(self):
        taus = sample_parity_chain(4, 100_000, seed=88)
        se = math.sqrt(0.3125 / 100_000)  # exact var: 1/4 + 1/16
        dev = abs(float(taus.mean()) - 0.75)
        ratio = expected_tau_hat(1024) / (0.5 * math.log(1024.0))
        ok = dev < 3 * se and 0.9 <= ratio <= 1.05 \
            and abs(ratio - 0.983) < 5e-4
        report(8, ok, f"|mean - 0.75| = {dev:.5f} < 3 SE = {3 * se:.5f}; "
                      f"mean/(log(n)/2) at n = 2^10 is {ratio:.4f} "
                      f"in [0.9, 1.05]")

    def test_c9_non_maximality(self):
        t_tail, t_tv, ratio = nonmaximality_ratio(1024, level=0.5)
        grid = default_t_grid()
        worst_gap = -math.inf
        for k in list(range(1, 21)) + [50, 100, 300, 1024]:
            for t in grid:
                tv_val, v_val, _ = coupling_gap(k, float(t))
                worst_gap = max(worst_gap, tv_val - v_val)
        eq_dev = max(abs(coupling_gap(k, float(t))[2])
                     for k in (1, 2) for t in grid)
        ok = 1.5 <= ratio <= 2.5 and worst_gap <= 1e-12 and eq_dev <= 1e-12
        report(9, ok,
               f"t*(tail=1/2)/t*(tv=1/2) = {t_tail:.3f}/{t_tv:.3f} = "
               f"{ratio:.3f} in [1.5, 2.5]; tv <= tail + 1e-12 everywhere "
               f"(worst excess {worst_gap:.1e}); |tv - tail| <= 1e-12 at "
               f"k in (1, 2) (max {eq_dev:.1e})")
