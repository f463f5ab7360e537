"""Splittable deterministic random streams.

Every replica of a simulation owns one stream, identified by a
``(seed, stream)`` pair of 64-bit integers.  The generator is splitmix64:
the state advances by a fixed odd increment and each output is the
finalizer hash of the state.  Streams are decorrelated by hashing the
stream id into the initial state, so replica results do not depend on
how replicas are batched across workers.

The same arithmetic is implemented three times (plain python ints here,
vectorized numpy below, scalar numba in the kernel modules) and produces
the same draw sequence in all three, which is what makes simulation
reports reproducible across backends and parallelism settings.
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
#: 2**-53, converts the top 53 bits of a draw to a uniform in [0, 1).
INV53 = 1.1102230246251565e-16


def mix64(z: int) -> int:
    """splitmix64 finalizer on a python int (mod 2**64)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def stream_init(seed: int, stream: int) -> int:
    """Initial state for stream ``stream`` of seed ``seed``.

    The double hash keeps distinct streams of one seed far apart in the
    splitmix sequence, so consecutive stream ids do not overlap.
    """
    a = mix64(seed & MASK64)
    return mix64(((a ^ (stream & MASK64)) + GOLDEN) & MASK64)


class RngStream:
    """Sequential view of one (seed, stream) draw sequence."""

    __slots__ = ("seed", "stream", "_state")

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        self._state = stream_init(self.seed, self.stream)

    def next_u64(self) -> int:
        self._state = (self._state + GOLDEN) & MASK64
        return mix64(self._state)

    def uniform(self) -> float:
        """53-bit uniform in [0, 1)."""
        return float(self.next_u64() >> 11) * INV53

    def exponential(self, rate: float) -> float:
        if rate <= 0.0:
            raise ValueError("exponential rate must be positive")
        return -math.log1p(-self.uniform()) / rate

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream={self.stream})"


# ---------------------------------------------------------------------------
# Vectorized counterparts (one lane per replica).  All operands are uint64;
# numpy integer arithmetic wraps mod 2**64 exactly like the scalar version.

_U_GOLDEN = np.uint64(GOLDEN)
_U_MIX1 = np.uint64(_MIX1)
_U_MIX2 = np.uint64(_MIX2)
_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)
_U11 = np.uint64(11)


def mix64_vec(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _U30)) * _U_MIX1
    z = (z ^ (z >> _U27)) * _U_MIX2
    return z ^ (z >> _U31)


def stream_init_vec(seed: int, streams: np.ndarray) -> np.ndarray:
    """Vector of initial states for the given stream ids."""
    a = np.uint64(mix64(seed & MASK64))
    return mix64_vec((a ^ streams.astype(np.uint64)) + _U_GOLDEN)


def next_uniform_vec(states: np.ndarray) -> np.ndarray:
    """Advance every lane in place and return one uniform per lane."""
    states += _U_GOLDEN
    return (mix64_vec(states) >> _U11).astype(np.float64) * INV53
