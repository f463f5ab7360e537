"""Admissible joint-jump controls for the coupled pair.

A control assigns a rate to every joint jump (i, j), i, j in {0..n}:
the chain X flips coordinate i and Y flips coordinate j at that rate
(index 0 = no move on that side).  Marginal correctness pins the row and
column sums of the rate matrix to one, so a control is determined by a
doubly sub-stochastic core plus the implied single-jump slack.

Built-in controls are state-feedback: they depend on the current state
only through which coordinates are matched.  The parametric family
interpolates between the pair-matching control, the classical one that
keeps pairing down to a single mismatch, and fully independent chains.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .core import CouplingState, DimensionMismatchError

#: tolerance for the row/column sum identities; loose enough that rates
#: like 1/(k-1) accumulated over 2**16 coordinates in doubles still pass.
SUM_TOL = 1e-9


class StrategyError(ValueError):
    """Invalid strategy parameters or strategy file."""


@dataclass
class QSpec:
    """Sparse joint-jump rate specification.

    ``joint`` maps (i, j) -> rate with i, j in {0..n} and (0, 0) absent.
    Entries (i, 0) and (0, j) are the single-jump slack terms.
    """

    n: int
    joint: dict[tuple[int, int], float] = field(default_factory=dict)

    def rate(self, i: int, j: int) -> float:
        return self.joint.get((i, j), 0.0)

    def total_rate(self) -> float:
        return float(sum(self.joint.values()))

    def entries(self) -> list[tuple[tuple[int, int], float]]:
        """Entries in canonical (row, column) order."""
        return sorted(self.joint.items())


@dataclass
class QViolation:
    kind: str  # "negative-rate" | "row-sum" | "col-sum" | "zero-zero"
    index: tuple[int, int] | int
    value: float

    def __str__(self):
        if self.kind == "negative-rate":
            return f"negative rate at {self.index}: {self.value:.17g}"
        if self.kind == "zero-zero":
            return f"rate at (0, 0) must be absent, found {self.value:.17g}"
        which = "row" if self.kind == "row-sum" else "column"
        return f"{which} {self.index} sums to {self.value:.17g}, expected 1"


@dataclass
class QReport:
    ok: bool
    violations: list[QViolation]

    def __bool__(self):
        return self.ok


def validate_qspec(q: QSpec) -> QReport:
    """Check nonnegativity and the row/column sum identities.

    Returns a structured report and never raises.
    """
    violations: list[QViolation] = []
    row = np.zeros(q.n + 1)
    col = np.zeros(q.n + 1)
    for (i, j), r in q.joint.items():
        if i == 0 and j == 0:
            violations.append(QViolation("zero-zero", (0, 0), r))
            continue
        if r < 0.0:
            violations.append(QViolation("negative-rate", (i, j), r))
        row[i] += r
        col[j] += r
    for i in range(1, q.n + 1):
        if abs(row[i] - 1.0) > SUM_TOL:
            violations.append(QViolation("row-sum", i, float(row[i])))
    for j in range(1, q.n + 1):
        if abs(col[j] - 1.0) > SUM_TOL:
            violations.append(QViolation("col-sum", j, float(col[j])))
    return QReport(not violations, violations)


@dataclass
class StrategyParams:
    """Per-k control weights for the parametric family.

    For k unmatched coordinates, ``u[k]`` is the weight unmatched
    coordinates put on independent single jumps (the rest pairs them),
    and ``b[k]`` is the weight matched coordinates put on breaking the
    match (the rest moves synchronously).  Row k = 0 is ignored: with no
    mismatch the chains move synchronously.  k = 1 always forces single
    jumps, since pairing needs two unmatched coordinates.
    """

    u: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=np.float64)
        self.b = np.asarray(self.b, dtype=np.float64)
        if self.u.shape != self.b.shape or self.u.ndim != 1:
            raise StrategyError("u and b tables must be 1-d and equal length")
        for name, tab in (("u", self.u), ("b", self.b)):
            bad = np.flatnonzero((tab < 0.0) | (tab > 1.0) | ~np.isfinite(tab))
            if bad.size:
                k = int(bad[0])
                raise StrategyError(
                    f"{name}[{k}] = {tab[k]!r} outside [0, 1]")

    @property
    def n(self) -> int:
        return len(self.u) - 1

    def effective_tables(self) -> tuple[np.ndarray, np.ndarray]:
        """Tables with the forced rows applied (u[1] = 1, b[0] = 0)."""
        u = self.u.copy()
        b = self.b.copy()
        if len(u) > 1:
            u[1] = 1.0
        u[0] = 0.0
        b[0] = 0.0
        return u, b


def params_from_rule(n: int, u_odd: float, u_even: float,
                     b: float) -> StrategyParams:
    """Parity-indexed parameter table (u depends on parity of k only)."""
    ks = np.arange(n + 1)
    u = np.where(ks % 2 == 1, u_odd, u_even).astype(np.float64)
    return StrategyParams(u, np.full(n + 1, float(b)))


class ParametricStrategy:
    """State-feedback control defined by a StrategyParams table."""

    def __init__(self, params: StrategyParams, name: str = "parametric"):
        self.params = params
        self.name = name

    @property
    def n(self) -> int:
        return self.params.n

    @classmethod
    def optimal(cls, n: int) -> "ParametricStrategy":
        """Pair unmatched coordinates when their count is even, push the
        count back to even with independent singles when it is odd."""
        return cls(params_from_rule(n, 1.0, 0.0, 0.0), "optimal")

    @classmethod
    def aldous(cls, n: int) -> "ParametricStrategy":
        """Always pair unmatched coordinates; go independent only when a
        single mismatch remains."""
        params = params_from_rule(n, 0.0, 0.0, 0.0)
        if n >= 1:
            params.u[1] = 1.0
        return cls(params, "aldous")

    @classmethod
    def independent(cls, n: int) -> "ParametricStrategy":
        """No coordination at all: every coordinate of each chain jumps
        on its own."""
        return cls(params_from_rule(n, 1.0, 1.0, 1.0), "independent")

    def qspec(self, state: CouplingState) -> QSpec:
        return parametric_q(state, self.params)

    def __call__(self, state: CouplingState) -> QSpec:
        return self.qspec(state)

    def __repr__(self):
        return f"ParametricStrategy({self.name!r}, n={self.n})"


def parametric_q(state: CouplingState, params: StrategyParams) -> QSpec:
    """Materialize the parametric control at the given state."""
    n = state.n
    if params.n != n:
        raise StrategyError(
            f"params cover k = 0..{params.n} but state dimension is {n}")
    k = state.n_unmatched
    u_tab, b_tab = params.effective_tables()
    u = float(u_tab[k])
    b = float(b_tab[k])
    joint: dict[tuple[int, int], float] = {}
    unmatched = state.unmatched
    for i in range(1, n + 1):
        if state.is_unmatched(i):
            continue
        if b < 1.0:
            joint[(i, i)] = 1.0 - b
        if b > 0.0:
            joint[(i, 0)] = b
            joint[(0, i)] = b
    if k == 1:
        i = unmatched[0]
        joint[(i, 0)] = 1.0
        joint[(0, i)] = 1.0
    elif k >= 2:
        pair = (1.0 - u) / (k - 1)
        for i in unmatched:
            if u > 0.0:
                joint[(i, 0)] = u
                joint[(0, i)] = u
            if pair > 0.0:
                for j in unmatched:
                    if j != i:
                        joint[(i, j)] = pair
    return QSpec(n, joint)


def optimal_q(state: CouplingState) -> QSpec:
    """Control that pairs on even mismatch counts and singles on odd."""
    return parametric_q(state, ParametricStrategy.optimal(state.n).params)


def aldous_q(state: CouplingState) -> QSpec:
    """Control that pairs whenever at least two coordinates mismatch."""
    return parametric_q(state, ParametricStrategy.aldous(state.n).params)


def independent_q(state: CouplingState) -> QSpec:
    return parametric_q(state, ParametricStrategy.independent(state.n).params)


def lambda_rates(q: QSpec, state: CouplingState) -> dict[int, float]:
    """Rates at which the mismatch count k jumps to k + m, m in -2..2.

    Aggregates the control: pairs of distinct unmatched coordinates take
    k down by 2, unmatched singles by 1, matched singles push it up by
    1, pairs of distinct matched coordinates up by 2, and everything
    else (diagonal moves and matched/unmatched cross pairs) leaves it
    unchanged.
    """
    if q.n != state.n:
        raise DimensionMismatchError(
            f"QSpec dimension {q.n} does not match state dimension {state.n}")
    lam = {-2: 0.0, -1: 0.0, 0: 0.0, 1: 0.0, 2: 0.0}
    for (i, j), r in q.joint.items():
        if i == 0 or j == 0:
            c = j if i == 0 else i
            lam[-1 if state.is_unmatched(c) else 1] += r
        elif i == j:
            lam[0] += r
        else:
            ui, uj = state.is_unmatched(i), state.is_unmatched(j)
            if ui and uj:
                lam[-2] += r
            elif not ui and not uj:
                lam[2] += r
            else:
                lam[0] += r
    return lam


def load_strategy_file(path: str, n: int) -> ParametricStrategy:
    """Load a custom strategy table from a JSON file.

    Format: an array of objects ``{"k": int, "u": float, "b": float}``.
    Rows for values of k not listed default to (u, b) = (0, 0).
    """
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StrategyError(
            f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: "
            f"{exc.msg}") from exc
    if not isinstance(data, list):
        raise StrategyError(f"{path}: top-level value must be an array")
    u = np.zeros(n + 1)
    b = np.zeros(n + 1)
    for idx, entry in enumerate(data):
        where = f"{path}: entry {idx}"
        if not isinstance(entry, Mapping):
            raise StrategyError(f"{where}: expected an object")
        unknown = set(entry) - {"k", "u", "b"}
        if unknown:
            raise StrategyError(f"{where}: unknown keys {sorted(unknown)}")
        try:
            k = int(entry["k"])
        except (KeyError, TypeError, ValueError):
            raise StrategyError(f"{where}: missing or non-integer 'k'")
        if not 0 <= k <= n:
            raise StrategyError(f"{where}: k = {k} outside 0..{n}")
        for name, tab in (("u", u), ("b", b)):
            val = entry.get(name, 0.0)
            if not isinstance(val, (int, float)) or isinstance(val, bool):
                raise StrategyError(f"{where}: '{name}' must be a number")
            if not 0.0 <= float(val) <= 1.0:
                raise StrategyError(
                    f"{where}: {name} = {val} outside [0, 1]")
            tab[k] = float(val)
    params = StrategyParams(u, b)
    return ParametricStrategy(params, name=f"file:{path}")
