"""Stochastic simulation of the coupled pair of walks.

Two execution paths with the same law:

* the general path (:func:`step`, :func:`run_coupling`) materializes the
  control as a sparse rate matrix at every event and samples from it --
  exact for any admissible control, used for arbitrary strategies and
  for cross-checking;
* the batch path (:func:`run_replicas`) samples built-in parametric
  controls structurally inside a compiled kernel (pick the event block
  by aggregate rate, then a uniform index or pair), which is equal in
  law because those controls put the same rate on every coordinate of a
  block and are constant between events.

For the pair-matching control the mismatch count alone is Markov, so
:func:`run_parity_chain` samples the coupling time from the ladder of
exponential holds directly; the batch engine exposes the same fast path
as ``engine="parity"``.

Each replica consumes its own (seed, stream) random stream, so reports
are reproducible bit for bit for any parallelism setting.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import stats
from .backend import backend_name, get_kernels
from .core import CouplingState, Vertex, apply_event, make_state
from .rng import RngStream, next_uniform_vec, stream_init_vec
from .strategy import ParametricStrategy, QSpec


class FrozenStateError(RuntimeError):
    """All joint-jump rates vanish, so no event can occur."""


class ConfigError(ValueError):
    """A replica-run configuration field is invalid."""


def step(state: CouplingState, q: QSpec, rng: RngStream
         ) -> tuple[float, tuple[int, int], CouplingState]:
    """Advance one event under the control q.

    Returns (holding time, chosen jump (i, j), new state).  The holding
    time is exponential with the total rate of q; the jump is selected
    with probability proportional to its rate, walking entries in
    canonical order so the draw sequence is reproducible.
    """
    entries = q.entries()
    total = math.fsum(r for _, r in entries)
    if total <= 0.0:
        raise FrozenStateError("frozen state: total jump rate is zero")
    dt = rng.exponential(total)
    z = rng.uniform() * total
    acc = 0.0
    chosen = entries[-1][0]
    for ij, r in entries:
        acc += r
        if z < acc:
            chosen = ij
            break
    i, j = chosen
    return dt, (i, j), apply_event(state, i, j)


@dataclass
class CouplingRun:
    """One realization of a coupling attempt."""

    tau: float  # +inf when censored
    censored: bool
    events: int
    state: CouplingState


def run_coupling(x0: Vertex, y0: Vertex, strategy: Callable,
                 t_max: float, rng: RngStream) -> CouplingRun:
    """Run the coupled pair until collision or t_max (general path).

    ``strategy`` maps a CouplingState to a QSpec; built-in strategies
    are callable and work directly.
    """
    if not t_max > 0.0:
        raise ConfigError("t_max must be positive")
    state = make_state(x0, y0)
    t = 0.0
    ev = 0
    while state.n_unmatched > 0:
        dt, _, nxt = step(state, strategy(state), rng)
        t += dt
        if t > t_max:
            return CouplingRun(math.inf, True, ev, state)
        state = nxt
        ev += 1
    return CouplingRun(t, False, ev, state)


def run_parity_chain(k0: int, rng: RngStream) -> float:
    """Coupling time of the pair-matching control, sampled on the ladder.

    From odd k the count drops to k - 1 after an Exp(2k) hold; from even
    k to k - 2 after an Exp(k) hold; zero is absorbing.
    """
    k = int(k0)
    if k < 0:
        raise ValueError("k0 must be >= 0")
    t = 0.0
    if k % 2 == 1:
        t += rng.exponential(2.0 * k)
        k -= 1
    while k >= 2:
        t += rng.exponential(float(k))
        k -= 2
    return t


def sample_parity_chain(k0: int, replicas: int, seed: int,
                        stream0: int = 0) -> np.ndarray:
    """Vectorized :func:`run_parity_chain`: one sample per stream.

    Draw-for-draw identical to the scalar version on each stream.
    """
    if k0 < 0:
        raise ValueError("k0 must be >= 0")
    states = stream_init_vec(seed, stream0 + np.arange(replicas))
    tau = np.zeros(replicas, dtype=np.float64)
    k = int(k0)
    if k % 2 == 1:
        tau += -np.log1p(-next_uniform_vec(states)) / (2.0 * k)
        k -= 1
    while k >= 2:
        tau += -np.log1p(-next_uniform_vec(states)) / float(k)
        k -= 2
    return tau


def canonical_pair(n: int, k0: int) -> tuple[Vertex, Vertex]:
    """Start vertices at mismatch k0: all-zeros versus first k0 ones."""
    if not 0 <= k0 <= n:
        raise ConfigError(f"k0 = {k0} outside 0..{n}")
    return Vertex.zero(n), Vertex.from_indices(n, range(1, k0 + 1))


@dataclass
class ReplicaConfig:
    """Inputs of a batch run; see :func:`run_replicas`."""

    n: int
    replicas: int
    seed: int
    t_grid: np.ndarray
    strategy: object = None          # ParametricStrategy | callable | None
    k0: int | None = None
    x0: Vertex | None = None
    y0: Vertex | None = None
    engine: str = "bits"             # "bits" | "parity"
    t_max: float | None = None       # default: last grid point
    parallelism: int = 1
    stream0: int = 0

    def validate(self) -> None:
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if self.replicas < 1:
            raise ConfigError(f"replicas must be >= 1, got {self.replicas}")
        if self.parallelism < 1:
            raise ConfigError("parallelism must be >= 1")
        grid = np.asarray(self.t_grid, dtype=np.float64)
        if grid.ndim != 1 or grid.size == 0:
            raise ConfigError("t_grid must be a nonempty 1-d array")
        if np.any(np.diff(grid) <= 0):
            raise ConfigError("t_grid must be strictly ascending")
        if grid[0] < 0:
            raise ConfigError("t_grid values must be nonnegative")
        have_k = self.k0 is not None
        have_xy = self.x0 is not None or self.y0 is not None
        if have_k == have_xy:
            raise ConfigError(
                "specify exactly one of k0 or explicit start vertices x0,y0")
        if have_xy and (self.x0 is None or self.y0 is None):
            raise ConfigError("x0 and y0 must be given together")
        if have_k and not 0 <= self.k0 <= self.n:
            raise ConfigError(f"k0 = {self.k0} outside 0..{self.n}")
        if have_xy and (self.x0.n != self.n or self.y0.n != self.n):
            raise ConfigError("x0/y0 dimension differs from n")
        if self.engine not in ("bits", "parity"):
            raise ConfigError(f"unknown engine {self.engine!r}")
        if self.engine == "parity":
            if not have_k:
                raise ConfigError("the parity engine needs k0")
            name = getattr(self.strategy, "name", None)
            if self.strategy is not None and name != "optimal":
                raise ConfigError(
                    "the parity engine realizes only the optimal strategy")
        elif self.strategy is None:
            raise ConfigError("the bits engine needs a strategy")
        t_max = self.resolved_t_max()
        if not t_max > 0.0:
            raise ConfigError("t_max must be positive")
        if t_max < grid[-1]:
            raise ConfigError("t_max must cover the last grid point")

    def resolved_t_max(self) -> float:
        if self.t_max is not None:
            return float(self.t_max)
        return float(np.asarray(self.t_grid)[-1])

    def start_pair(self) -> tuple[Vertex, Vertex]:
        if self.k0 is not None:
            return canonical_pair(self.n, self.k0)
        return self.x0, self.y0

    def strategy_label(self) -> str:
        if self.engine == "parity":
            return "parity(optimal)"
        return getattr(self.strategy, "name", "custom")


@dataclass
class SimReport:
    """Empirical tail summary of a batch of coupling attempts."""

    replicas: int
    seed: int
    strategy: str
    start: str
    backend: str
    t_grid: np.ndarray
    tail: np.ndarray
    halfwidth: np.ndarray
    dkw99: float
    mean_tau: float | None
    se: float | None
    censored: int
    max_events: int
    config: dict = field(default_factory=dict)

    SCHEMA_VERSION = 1
    #: above this censored fraction the mean is biased enough to withhold
    MAX_CENSORED_FRACTION = 1e-3

    def to_json_dict(self) -> dict:
        return {
            "schema_version": self.SCHEMA_VERSION,
            "kind": "sim_report",
            "config": self.config,
            "replicas": self.replicas,
            "seed": self.seed,
            "strategy": self.strategy,
            "start": self.start,
            "backend": self.backend,
            "tail": [[float(t), float(p), float(h)] for t, p, h in
                     zip(self.t_grid, self.tail, self.halfwidth)],
            "mean_tau": self.mean_tau,
            "se": self.se,
            "censored": self.censored,
            "max_events": self.max_events,
            "dkw99": self.dkw99,
        }

    def csv_rows(self):
        yield ("t", "p", "hw")
        for t, p, h in zip(self.t_grid, self.tail, self.halfwidth):
            yield (float(t), float(p), float(h))


def _summarize(taus: np.ndarray, events: np.ndarray, config: ReplicaConfig,
               backend: str) -> SimReport:
    t_grid = np.asarray(config.t_grid, dtype=np.float64)
    tail = stats.empirical_tail(taus, t_grid)
    hw = stats.normal_halfwidth(tail, taus.size)
    censored = int(np.count_nonzero(np.isinf(taus)))
    mean_tau = se = None
    if censored <= SimReport.MAX_CENSORED_FRACTION * taus.size:
        finite = taus[np.isfinite(taus)]
        mean_tau = float(np.mean(finite))
        se = float(np.std(finite, ddof=1) / math.sqrt(finite.size)) \
            if finite.size > 1 else 0.0
    start = (f"k0={config.k0}" if config.k0 is not None
             else f"x0={config.x0},y0={config.y0}")
    return SimReport(
        replicas=config.replicas, seed=config.seed,
        strategy=config.strategy_label(), start=start, backend=backend,
        t_grid=t_grid, tail=tail, halfwidth=hw,
        dkw99=stats.dkw_epsilon(config.replicas, 0.01),
        mean_tau=mean_tau, se=se, censored=censored,
        max_events=int(events.max()) if events.size else 0,
        config={
            "n": config.n, "replicas": config.replicas, "seed": config.seed,
            "strategy": config.strategy_label(), "start": start,
            "engine": config.engine, "t_max": config.resolved_t_max(),
            "parallelism": config.parallelism, "stream0": config.stream0,
        })


def _kernel_inputs(n: int, x0: Vertex, y0: Vertex):
    state = make_state(x0, y0)
    unmatched = np.array([c - 1 for c in state.unmatched], dtype=np.int64)
    in_u = np.zeros(n, dtype=bool)
    if unmatched.size:
        in_u[unmatched] = True
    matched = np.flatnonzero(~in_u).astype(np.int64)
    perm0 = np.concatenate([unmatched, matched])
    return state.n_unmatched, perm0, x0.words(), y0.words()


def _chunk_ranges(total: int, parts: int):
    parts = max(1, min(parts, total))
    base, extra = divmod(total, parts)
    lo = 0
    for p in range(parts):
        size = base + (1 if p < extra else 0)
        yield lo, size
        lo += size


def run_replicas(config: ReplicaConfig, backend: str | None = None
                 ) -> SimReport:
    """Run a batch of independent replicas and summarize the tail.

    Deterministic given (seed, stream0, replicas, config) for any
    parallelism: replica r always consumes stream ``stream0 + r``.
    """
    config.validate()
    name = backend_name(backend)
    t_max = config.resolved_t_max()

    if config.engine == "parity":
        taus = sample_parity_chain(config.k0, config.replicas, config.seed,
                                   config.stream0)
        events = np.zeros(config.replicas, dtype=np.int64)
        return _summarize(taus, events, config, "numpy")

    x0, y0 = config.start_pair()
    if isinstance(config.strategy, ParametricStrategy):
        if config.strategy.n != config.n:
            raise ConfigError("strategy table dimension differs from n")
        kern = get_kernels(name)
        k0, perm0, x0w, y0w = _kernel_inputs(config.n, x0, y0)
        u_eff, b_eff = config.strategy.params.effective_tables()

        def batch(lo, count):
            return kern.coupling_tau_batch(
                config.n, k0, perm0, x0w, y0w, u_eff, b_eff, t_max,
                config.seed, config.stream0 + lo, count)[:2]
    else:
        name = "python"

        def batch(lo, count):
            taus = np.empty(count, dtype=np.float64)
            evs = np.empty(count, dtype=np.int64)
            for r in range(count):
                rng = RngStream(config.seed, config.stream0 + lo + r)
                run = run_coupling(x0, y0, config.strategy, t_max, rng)
                taus[r] = run.tau
                evs[r] = run.events
            return taus, evs

    ranges = list(_chunk_ranges(config.replicas, config.parallelism))
    if len(ranges) == 1:
        parts = [batch(*ranges[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(ranges)) as pool:
            parts = list(pool.map(lambda lh: batch(*lh), ranges))
    taus = np.concatenate([p[0] for p in parts])
    events = np.concatenate([p[1] for p in parts])
    return _summarize(taus, events, config, name)


def sample_coupling_taus(n: int, k0: int, strategy: ParametricStrategy,
                         replicas: int, seed: int, t_max: float,
                         stream0: int = 0, backend: str | None = None
                         ) -> np.ndarray:
    """Coupling-time samples for a built-in strategy (bit-level kernel)."""
    x0, y0 = canonical_pair(n, k0)
    kern = get_kernels(backend)
    k, perm0, x0w, y0w = _kernel_inputs(n, x0, y0)
    u_eff, b_eff = strategy.params.effective_tables()
    tau, _, _, _ = kern.coupling_tau_batch(
        n, k, perm0, x0w, y0w, u_eff, b_eff, t_max, seed, stream0, replicas)
    return tau


def marginal_flip_counts(strategy: ParametricStrategy, n: int,
                         horizon: float, seed: int, replicas: int = 1,
                         k0: int | None = None, stream0: int = 0,
                         backend: str | None = None):
    """Per-coordinate flip counts of both chains over a time horizon.

    The pair keeps evolving after collisions (matched coordinates move
    synchronously), so each coordinate of each chain must flip at unit
    rate for any admissible control.  Returns (flips_x, flips_y, events)
    with the flips aggregated over replicas, shape (n,).
    """
    if not horizon > 0.0:
        raise ConfigError("horizon must be positive")
    if k0 is None:
        k0 = n // 2
    x0, y0 = canonical_pair(n, k0)
    kern = get_kernels(backend)
    k, perm0, _, _ = _kernel_inputs(n, x0, y0)
    u_eff, b_eff = strategy.params.effective_tables()
    fx, fy, events = kern.marginal_flip_batch(
        n, k, perm0, u_eff, b_eff, horizon, seed, stream0, replicas)
    return fx.sum(axis=0), fy.sum(axis=0), events
