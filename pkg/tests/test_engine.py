"""Event engine: exactness in law, determinism, censoring, backends."""

import math

import numpy as np
import pytest

from hqc import stats, vhat
from hqc.backend import get_kernels
from hqc.core import Vertex, make_state
from hqc.engine import (ConfigError, FrozenStateError, ReplicaConfig,
                        canonical_pair, marginal_flip_counts, run_coupling,
                        run_parity_chain, run_replicas, sample_coupling_taus,
                        sample_parity_chain, step)
from hqc.rng import RngStream
from hqc.strategy import ParametricStrategy, QSpec, optimal_q

try:
    import numba  # noqa: F401
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


class TestStep:
    def test_synchronous_at_zero_mismatch(self):
        state = make_state(Vertex.zero(4), Vertex.zero(4))
        rng = RngStream(1, 0)
        for _ in range(25):
            dt, (i, j), state = step(state, optimal_q(state), rng)
            assert dt > 0.0
            assert i == j >= 1
            assert state.n_unmatched == 0

    def test_two_mismatches_only_pair_events_change_count(self):
        x0, y0 = canonical_pair(5, 2)
        state = make_state(x0, y0)
        rng = RngStream(2, 0)
        q = optimal_q(state)
        assert q.total_rate() == pytest.approx(5.0, abs=1e-12)
        saw_pair = False
        for _ in range(200):
            dt, (i, j), nxt = step(state, optimal_q(state), rng)
            if state.n_unmatched == 2:
                if nxt.n_unmatched == 0:
                    assert i != j and i != 0 and j != 0
                    saw_pair = True
                else:
                    assert nxt.n_unmatched == 2 and i == j
            state = nxt
        assert saw_pair

    def test_replay_is_bit_identical(self):
        x0, y0 = canonical_pair(6, 3)

        def trace():
            state = make_state(x0, y0)
            rng = RngStream(7, 3)
            out = []
            for _ in range(50):
                dt, ev, state = step(state, optimal_q(state), rng)
                out.append((dt, ev))
            return out

        assert trace() == trace()

    def test_frozen_state_error(self):
        state = make_state(Vertex.zero(2), Vertex.zero(2))
        with pytest.raises(FrozenStateError, match="frozen state"):
            step(state, QSpec(2, {}), RngStream(1, 0))


class TestRunCoupling:
    def test_equal_starts_couple_instantly(self):
        x = Vertex.from_bits([1, 0, 1])
        run = run_coupling(x, x, optimal_q, 10.0, RngStream(3, 0))
        assert run.tau == 0.0 and run.events == 0 and not run.censored

    def test_censoring_at_t_max(self):
        x0, y0 = canonical_pair(12, 12)
        run = run_coupling(x0, y0, optimal_q, 1e-6, RngStream(4, 0))
        assert run.censored and run.tau == math.inf

    def test_single_mismatch_is_rate_two_exponential(self):
        # python-path mean over 10^4 runs: 0.5 within 3 SE = 0.015
        x0, y0 = canonical_pair(2, 1)
        total = 0.0
        for r in range(10_000):
            total += run_coupling(x0, y0, optimal_q, 100.0,
                                  RngStream(42, r)).tau
        assert abs(total / 10_000 - 0.5) < 3 * 0.5 / 100.0

    def test_mismatch_one_and_two_agree_in_law(self):
        strat = ParametricStrategy.optimal(4)
        a = sample_coupling_taus(4, 1, strat, 20_000, 11, 100.0)
        b = sample_coupling_taus(4, 2, strat, 20_000, 12, 100.0,
                                 stream0=20_000)
        assert stats.ks_statistic(a, b) < stats.ks_critical(20_000, 20_000)

    def test_count_never_increases_under_optimal(self):
        recorded = []

        def recording(state):
            recorded.append(state.n_unmatched)
            return optimal_q(state)

        x0, y0 = canonical_pair(8, 7)
        for r in range(50):
            recorded.clear()
            run_coupling(x0, y0, recording, 100.0, RngStream(5, r))
            assert all(a >= b for a, b in zip(recorded, recorded[1:]))

    def test_t_max_validation(self):
        x0, y0 = canonical_pair(2, 1)
        with pytest.raises(ConfigError):
            run_coupling(x0, y0, optimal_q, 0.0, RngStream(1, 0))


class TestParityChain:
    def test_absorbed_start(self):
        assert run_parity_chain(0, RngStream(1, 0)) == 0.0

    def test_mean_k4(self):
        taus = sample_parity_chain(4, 100_000, seed=42)
        se = math.sqrt(0.3125 / 100_000)  # exact variance 1/4 + 1/16
        assert abs(taus.mean() - 0.75) < 3 * se

    def test_mean_k3(self):
        taus = sample_parity_chain(3, 100_000, seed=43)
        se = math.sqrt((0.25 + 1.0 / 36.0) / 100_000)
        assert abs(taus.mean() - 2.0 / 3.0) < 3 * se

    def test_negative_start_rejected(self):
        with pytest.raises(ValueError):
            run_parity_chain(-1, RngStream(1, 0))
        with pytest.raises(ValueError):
            sample_parity_chain(-1, 10, seed=1)

    def test_scalar_matches_vector(self):
        vec = sample_parity_chain(7, 12, seed=9, stream0=100)
        for r in range(12):
            assert run_parity_chain(7, RngStream(9, 100 + r)) == vec[r]

    def test_draw_count_is_deterministic(self):
        # same stream, same ladder -> identical sample on replay
        a = sample_parity_chain(9, 1000, seed=17)
        b = sample_parity_chain(9, 1000, seed=17)
        assert np.array_equal(a, b)


class TestRunReplicas:
    def grid(self):
        return np.geomspace(0.01, 10.0, 25)

    def test_tail_within_dkw_band_of_exact(self):
        config = ReplicaConfig(n=10, replicas=20_000, seed=42,
                               t_grid=self.grid(), k0=10, engine="parity")
        report = run_replicas(config)
        eps = stats.dkw_epsilon(20_000, 0.01)
        exact = np.array([vhat(10, t) for t in self.grid()])
        assert np.max(np.abs(report.tail - exact)) < eps

    def test_single_replica_tail_is_step_function(self):
        config = ReplicaConfig(n=4, replicas=1, seed=1, t_grid=self.grid(),
                               k0=3, strategy=ParametricStrategy.optimal(4))
        report = run_replicas(config)
        assert set(report.tail.tolist()) <= {0.0, 1.0}
        assert all(a >= b for a, b in zip(report.tail, report.tail[1:]))

    def test_parallelism_invariance(self):
        kwargs = dict(n=6, replicas=4000, seed=8, t_grid=self.grid(), k0=4,
                      strategy=ParametricStrategy.aldous(6))
        r1 = run_replicas(ReplicaConfig(parallelism=1, **kwargs))
        r8 = run_replicas(ReplicaConfig(parallelism=8, **kwargs))
        assert np.array_equal(r1.tail, r8.tail)
        assert r1.mean_tau == r8.mean_tau
        assert r1.max_events == r8.max_events

    def test_rerun_is_identical(self):
        config = ReplicaConfig(n=5, replicas=2000, seed=3,
                               t_grid=self.grid(), k0=5,
                               strategy=ParametricStrategy.independent(5))
        a, b = run_replicas(config), run_replicas(config)
        assert np.array_equal(a.tail, b.tail)
        assert a.to_json_dict() == b.to_json_dict()

    def test_censoring_reported_and_mean_withheld(self):
        grid = np.array([0.01, 0.05, 0.1])
        config = ReplicaConfig(n=8, replicas=2000, seed=5, t_grid=grid,
                               k0=8, strategy=ParametricStrategy.optimal(8),
                               t_max=0.1)
        report = run_replicas(config)
        assert report.censored > 0.001 * 2000
        assert report.mean_tau is None and report.se is None

    def test_explicit_vertices(self):
        x0 = Vertex.from_bits([0, 0, 1, 0])
        y0 = Vertex.from_bits([1, 0, 1, 1])
        config = ReplicaConfig(n=4, replicas=500, seed=2,
                               t_grid=self.grid(), x0=x0, y0=y0,
                               strategy=ParametricStrategy.optimal(4))
        report = run_replicas(config)
        assert report.tail[0] <= 1.0

    def test_config_errors_name_fields(self):
        grid = self.grid()
        strat = ParametricStrategy.optimal(4)
        with pytest.raises(ConfigError, match="replicas"):
            ReplicaConfig(n=4, replicas=0, seed=1, t_grid=grid, k0=2,
                          strategy=strat).validate()
        with pytest.raises(ConfigError, match="t_grid"):
            ReplicaConfig(n=4, replicas=1, seed=1, t_grid=grid[::-1], k0=2,
                          strategy=strat).validate()
        with pytest.raises(ConfigError, match="exactly one"):
            ReplicaConfig(n=4, replicas=1, seed=1, t_grid=grid,
                          strategy=strat).validate()
        with pytest.raises(ConfigError, match="k0"):
            ReplicaConfig(n=4, replicas=1, seed=1, t_grid=grid, k0=9,
                          strategy=strat).validate()
        with pytest.raises(ConfigError, match="parity"):
            ReplicaConfig(n=4, replicas=1, seed=1, t_grid=grid, k0=2,
                          engine="parity",
                          strategy=ParametricStrategy.aldous(4)).validate()
        with pytest.raises(ConfigError, match="t_max"):
            ReplicaConfig(n=4, replicas=1, seed=1, t_grid=grid, k0=2,
                          strategy=strat, t_max=1.0).validate()


class TestLawAgreement:
    def test_bit_level_matches_ladder(self):
        # lumped and bit-level realizations of the same strategy
        strat = ParametricStrategy.optimal(8)
        bit = sample_coupling_taus(8, 6, strat, 30_000, 21, 100.0)
        ladder = sample_parity_chain(6, 30_000, seed=21, stream0=30_000)
        assert stats.ks_statistic(bit, ladder) \
            < stats.ks_critical(30_000, 30_000)

    def test_aldous_even_start_matches_optimal(self):
        a = sample_coupling_taus(8, 4, ParametricStrategy.aldous(8),
                                 30_000, 31, 100.0)
        b = sample_coupling_taus(8, 4, ParametricStrategy.optimal(8),
                                 30_000, 32, 100.0, stream0=30_000)
        assert stats.ks_statistic(a, b) < stats.ks_critical(30_000, 30_000)

    def test_python_path_matches_kernel_in_law(self):
        x0, y0 = canonical_pair(5, 3)
        py = np.array([run_coupling(x0, y0, optimal_q, 100.0,
                                    RngStream(55, r)).tau
                       for r in range(5000)])
        kern = sample_coupling_taus(5, 3, ParametricStrategy.optimal(5),
                                    5000, 56, 100.0)
        assert stats.ks_statistic(py, kern) < stats.ks_critical(5000, 5000)


class TestKernels:
    def test_absorbed_states_have_equal_words(self):
        kern = get_kernels()
        x0, y0 = canonical_pair(9, 5)
        from hqc.engine import _kernel_inputs
        k0, perm0, x0w, y0w = _kernel_inputs(9, x0, y0)
        u_eff, b_eff = ParametricStrategy.optimal(9).params.effective_tables()
        tau, events, xw, yw = kern.coupling_tau_batch(
            9, k0, perm0, x0w, y0w, u_eff, b_eff, 100.0, 77, 0, 500)
        assert np.all(np.isfinite(tau))
        assert np.array_equal(xw, yw)
        assert np.all(events >= 1)

    @pytest.mark.skipif(not HAVE_NUMBA, reason="numba unavailable")
    def test_backends_agree_lane_for_lane(self):
        x0, y0 = canonical_pair(7, 5)
        from hqc.engine import _kernel_inputs
        k0, perm0, x0w, y0w = _kernel_inputs(7, x0, y0)
        from hqc.strategy import params_from_rule
        # exercise every category: breaking, singles, pairs
        strat = ParametricStrategy(params_from_rule(7, 0.5, 0.25, 0.5))
        u_eff, b_eff = strat.params.effective_tables()
        args = (7, k0, perm0, x0w, y0w, u_eff, b_eff, 8.0, 99, 0, 4000)
        t_nb, e_nb, x_nb, y_nb = get_kernels("numba").coupling_tau_batch(*args)
        t_np, e_np, x_np, y_np = get_kernels("numpy").coupling_tau_batch(*args)
        assert np.array_equal(e_nb, e_np)
        assert np.array_equal(x_nb, x_np) and np.array_equal(y_nb, y_np)
        finite = np.isfinite(t_nb)
        assert np.array_equal(finite, np.isfinite(t_np))
        assert np.max(np.abs(t_nb[finite] - t_np[finite])) < 1e-10

    @pytest.mark.skipif(not HAVE_NUMBA, reason="numba unavailable")
    def test_marginal_kernels_agree(self):
        strat = ParametricStrategy.independent(6)
        fx1, fy1, ev1 = marginal_flip_counts(strat, 6, 50.0, 13,
                                             backend="numba")
        fx2, fy2, ev2 = marginal_flip_counts(strat, 6, 50.0, 13,
                                             backend="numpy")
        assert np.array_equal(fx1, fx2) and np.array_equal(fy1, fy2)
        assert np.array_equal(ev1, ev2)

    def test_backend_env_flag(self, monkeypatch):
        from hqc import backend as bk
        monkeypatch.setenv("HQC_BACKEND", "numpy")
        assert bk.backend_name() == "numpy"
        monkeypatch.setenv("HQC_BACKEND", "bogus")
        with pytest.raises(ValueError):
            bk.backend_name()


class TestStructuralSampling:
    def test_kernel_block_rates_match_materialized_control(self):
        # the kernels sample blocks by aggregate rate instead of
        # materializing the control; the aggregates must equal the
        # mismatch-count rates of the materialized rate matrix
        from hqc.strategy import lambda_rates, params_from_rule, parametric_q
        from hqc.core import Vertex, make_state
        import itertools
        for n, unmatched in ((5, (1, 3)), (5, (2, 4, 5)), (6, (6,)),
                             (4, (1, 2, 3, 4)), (3, ())):
            state = make_state(Vertex.zero(n),
                               Vertex.from_indices(n, unmatched))
            k, mm = state.n_unmatched, n - state.n_unmatched
            for uo, ue, b in itertools.product((0.0, 0.5, 1.0), repeat=3):
                params = params_from_rule(n, uo, ue, b)
                u_eff, b_eff = params.effective_tables()
                u, bb = float(u_eff[k]), float(b_eff[k])
                lam = lambda_rates(parametric_q(state, params), state)
                assert lam[-1] == pytest.approx(2 * k * u, abs=1e-12)
                pair = k * (1.0 - u) if k >= 2 else 0.0
                assert lam[-2] == pytest.approx(pair, abs=1e-12)
                assert lam[1] == pytest.approx(2 * mm * bb, abs=1e-12)
                assert lam[0] == pytest.approx(mm * (1.0 - bb), abs=1e-12)
                assert lam[2] == 0.0  # family never pairs matched coords


class TestMarginalRates:
    def test_unit_flip_rate_all_builtins(self):
        n, horizon = 8, 2000.0
        se = 1.0 / math.sqrt(horizon)
        for idx, strat in enumerate((ParametricStrategy.optimal(n),
                                     ParametricStrategy.aldous(n),
                                     ParametricStrategy.independent(n))):
            fx, fy, _ = marginal_flip_counts(strat, n, horizon, 40 + idx)
            for counts in (fx, fy):
                rates = counts / horizon
                assert np.all(np.abs(rates - 1.0) < 4 * se), strat.name

    def test_rejects_bad_horizon(self):
        with pytest.raises(ConfigError):
            marginal_flip_counts(ParametricStrategy.optimal(4), 4, 0.0, 1)
