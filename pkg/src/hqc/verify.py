"""Numerical verification checks, shared by the CLI and the test suite.

Each check exercises one family of claims about the optimal coupling --
transform identities, parity inequalities, the polytope certificate,
simulation/law agreement, stochastic dominance of the coupling time,
and marginal correctness -- and reports a worst-case metric against its
threshold.
"""

from __future__ import annotations

import inspect
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import stats
from .analytic import (D_alpha, bellman_residual, check_laplace_identities,
                       maximize_over_Ln, parity_gap, vhat)
from .engine import (marginal_flip_counts, sample_coupling_taus,
                     sample_parity_chain)
from .strategy import ParametricStrategy, params_from_rule

DEFAULT_ALPHAS = (0.01, 0.1, 1.0, 10.0, 100.0)

ALL_CHECKS = ("identities", "parity", "bellman", "polytope", "dominance",
              "lumping", "marginals")
FAST_CHECKS = ("identities", "parity", "bellman", "polytope")


@dataclass
class CheckResult:
    name: str
    passed: bool
    metric: float
    threshold: float
    params: dict = field(default_factory=dict)
    detail: str = ""
    seconds: float = 0.0

    def to_json_dict(self) -> dict:
        return {"check": self.name, "pass": self.passed,
                "metric": self.metric, "threshold": self.threshold,
                "params": self.params, "detail": self.detail,
                "seconds": self.seconds}


def default_t_grid(count: int = 50) -> np.ndarray:
    """Log-spaced times; coupling tails decay exponentially."""
    return np.geomspace(1e-3, 20.0, count)


def battery_strategies(n: int) -> list[ParametricStrategy]:
    """The 27-strategy grid: u on odd counts, u on even counts, breaking.

    The corners are the named controls: (1, 0, 0) is the optimal
    pair-matching control, (0, 0, 0) the classical always-pair coupling
    (single jumps are forced at one mismatch anyway), and (1, 1, 1)
    fully independent chains.
    """
    named = {(1.0, 0.0, 0.0): "optimal", (0.0, 0.0, 0.0): "aldous",
             (1.0, 1.0, 1.0): "independent"}
    out = []
    for uo in (0.0, 0.5, 1.0):
        for ue in (0.0, 0.5, 1.0):
            for b in (0.0, 0.5, 1.0):
                name = named.get((uo, ue, b),
                                 f"grid(u_odd={uo},u_even={ue},b={b})")
                out.append(ParametricStrategy(params_from_rule(n, uo, ue, b),
                                              name))
    return out


def check_identities(m_max: int = 50, alphas=DEFAULT_ALPHAS,
                     tol: float = 1e-10, d2_tol: float = 1e-14
                     ) -> CheckResult:
    """Transform identities for m <= m_max plus the exact D(2) = 0."""
    t0 = time.perf_counter()
    worst = 0.0
    for m in range(1, m_max + 1):
        for a in alphas:
            for val in check_laplace_identities(m, a).values():
                if val is not None:
                    worst = max(worst, abs(val))
    worst_d2 = max(abs(D_alpha(2, a)) for a in alphas)
    passed = worst < tol and worst_d2 <= d2_tol
    return CheckResult(
        "identities", passed, worst, tol,
        {"m_max": m_max, "alphas": list(alphas)},
        f"max residual {worst:.3g}; max |D(2)| {worst_d2:.3g} "
        f"(tol {d2_tol:g})", time.perf_counter() - t0)


def check_parity(k_max: int = 100, t_grid=None, tol: float = 1e-12
                 ) -> CheckResult:
    """Sign of the parity gap: >= 0 for odd k, <= 0 for even k."""
    t0 = time.perf_counter()
    grid = default_t_grid() if t_grid is None else np.asarray(t_grid)
    worst = 0.0
    for k in range(1, k_max + 1):
        sign = 1.0 if k % 2 == 1 else -1.0
        for t in grid:
            worst = max(worst, -sign * parity_gap(k, float(t)))
    return CheckResult(
        "parity", worst <= tol, worst, tol,
        {"k_max": k_max, "t_points": len(grid)},
        f"worst sign violation {worst:.3g}", time.perf_counter() - t0)


def check_bellman(k_max: int = 200, t_grid=None, tol: float = 1e-9
                  ) -> CheckResult:
    """Drift of the tail under the pair-matching rates equals d/dt."""
    t0 = time.perf_counter()
    grid = default_t_grid() if t_grid is None else np.asarray(t_grid)
    worst = 0.0
    for k in range(1, k_max + 1):
        for t in grid:
            worst = max(worst, bellman_residual(k, float(t)))
    return CheckResult(
        "bellman", worst < tol, worst, tol,
        {"k_max": k_max, "t_points": len(grid)},
        f"max residual {worst:.3g}", time.perf_counter() - t0)


def check_polytope(k_max: int = 200, t_grid=None, value_tol: float = 1e-9
                   ) -> CheckResult:
    """Exact maximizer structure over the admissible rate polytope.

    For every (k, t) on the grid the enumerated maximum must be attained
    by the pair-matching vertex: no upward rates for k >= 2, downward
    budget saturated, single-jump rate 2k exactly on odd k and 0 on even
    k, and a nonnegative value.  At k = 1 the argmax must be reported as
    non-unique (upward rate at no cost).
    """
    t0 = time.perf_counter()
    grid = default_t_grid() if t_grid is None else np.asarray(t_grid)
    worst = 0.0
    failures = []
    for k in range(1, k_max + 1):
        n = k + 2
        for t in grid:
            res = maximize_over_Ln(k, float(t), n)
            lam = res.lam_star
            ok = True
            if k >= 2 and (lam.up1 != 0.0 or lam.up2 != 0.0):
                ok = False
            if lam.down2 + 0.5 * lam.down1 != float(k):
                ok = False
            want_down1 = 2.0 * k if k % 2 == 1 else 0.0
            if lam.down1 != want_down1:
                ok = False
            if res.value < -value_tol:
                ok = False
            if k == 1 and res.unique:
                ok = False
            own = sum(r * (vhat(k, float(t)) - vhat(k + m, float(t)))
                      for m, r in lam.as_dict().items() if m != 0)
            gap = abs(own - res.value)
            worst = max(worst, gap)
            if gap > value_tol * max(1.0, abs(res.value)):
                ok = False
            if not ok:
                failures.append((k, float(t)))
    passed = not failures
    detail = (f"max |vertex max - reported| {worst:.3g}"
              if passed else f"failed at {failures[:5]}")
    return CheckResult(
        "polytope", passed, worst, value_tol,
        {"k_max": k_max, "t_points": len(grid)}, detail,
        time.perf_counter() - t0)


def check_dominance(n: int = 6, replicas: int = 100_000, seed: int = 7,
                    k0s=None, t_grid=None, delta: float = 0.01,
                    backend: str | None = None) -> CheckResult:
    """No strategy in the battery beats the optimal tail anywhere.

    For each strategy and start distance, the empirical tail must stay
    above the exact optimal tail minus a simultaneous band.  Strategies
    equal in law to the optimal control sit on the boundary, so the
    band is what makes the one-sided comparison fair.
    """
    t0 = time.perf_counter()
    k0s = list(range(1, n + 1)) if k0s is None else list(k0s)
    grid = np.geomspace(0.01, 10.0, 50) if t_grid is None \
        else np.asarray(t_grid)
    eps = stats.dkw_epsilon(replicas, delta)
    t_max = float(grid[-1])
    battery = battery_strategies(n)
    worst = math.inf
    worst_case = None
    combo = 0
    for strat in battery:
        for k0 in k0s:
            taus = sample_coupling_taus(
                n, k0, strat, replicas, seed, t_max,
                stream0=combo * replicas, backend=backend)
            tail = stats.empirical_tail(taus, grid)
            exact = np.array([vhat(k0, t) for t in grid])
            margin = float(np.min(tail - (exact - eps)))
            if margin < worst:
                worst, worst_case = margin, (strat.name, k0)
            combo += 1
    passed = worst >= 0.0
    return CheckResult(
        "dominance", passed, worst, 0.0,
        {"n": n, "replicas": replicas, "seed": seed,
         "strategies": len(battery), "k0s": k0s, "band": eps},
        f"min margin {worst:.5f} at {worst_case}",
        time.perf_counter() - t0)


def check_lumping(n: int = 10, k0s=(3, 6, 10), replicas: int = 100_000,
                  seed: int = 11, alpha: float = 0.01,
                  backend: str | None = None) -> CheckResult:
    """Bit-level optimal simulation agrees in law with the hold ladder."""
    t0 = time.perf_counter()
    crit = stats.ks_critical(replicas, replicas, alpha)
    strat = ParametricStrategy.optimal(n)
    worst = 0.0
    for idx, k0 in enumerate(k0s):
        bit = sample_coupling_taus(n, k0, strat, replicas, seed, 100.0,
                                   stream0=2 * idx * replicas,
                                   backend=backend)
        ladder = sample_parity_chain(k0, replicas, seed,
                                     stream0=(2 * idx + 1) * replicas)
        worst = max(worst, stats.ks_statistic(bit, ladder))
    return CheckResult(
        "lumping", worst < crit, worst, crit,
        {"n": n, "k0s": list(k0s), "replicas": replicas, "seed": seed,
         "alpha": alpha},
        f"max KS {worst:.5f} vs critical {crit:.5f}",
        time.perf_counter() - t0)


def check_marginals(n: int = 8, horizon: float = 1e4, seed: int = 13,
                    replicas: int = 1, sigmas: float = 3.0,
                    backend: str | None = None) -> CheckResult:
    """Each coordinate of each chain flips at unit rate under every
    built-in strategy."""
    t0 = time.perf_counter()
    se = 1.0 / math.sqrt(horizon * replicas)
    worst = 0.0
    strategies = (ParametricStrategy.optimal(n), ParametricStrategy.aldous(n),
                  ParametricStrategy.independent(n))
    for idx, strat in enumerate(strategies):
        fx, fy, _ = marginal_flip_counts(strat, n, horizon, seed,
                                         replicas=replicas,
                                         stream0=idx * replicas,
                                         backend=backend)
        for counts in (fx, fy):
            rates = counts / (horizon * replicas)
            worst = max(worst, float(np.max(np.abs(rates - 1.0))) / se)
    return CheckResult(
        "marginals", worst <= sigmas, worst, sigmas,
        {"n": n, "horizon": horizon, "seed": seed, "replicas": replicas},
        f"worst deviation {worst:.2f} standard errors",
        time.perf_counter() - t0)


_CHECK_FUNCS = {
    "identities": check_identities,
    "parity": check_parity,
    "bellman": check_bellman,
    "polytope": check_polytope,
    "dominance": check_dominance,
    "lumping": check_lumping,
    "marginals": check_marginals,
}


def run_checks(names, **overrides) -> list[CheckResult]:
    """Run the named checks with per-check keyword overrides.

    ``overrides`` maps argument names to values; each check picks the
    arguments it understands.
    """
    results = []
    for name in names:
        if name not in _CHECK_FUNCS:
            raise ValueError(f"unknown check {name!r}; choose from "
                             f"{sorted(_CHECK_FUNCS)}")
        func = _CHECK_FUNCS[name]
        accepted = set(inspect.signature(func).parameters)
        kwargs = {k: v for k, v in overrides.items()
                  if k in accepted and v is not None}
        results.append(func(**kwargs))
    return results
