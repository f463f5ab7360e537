"""Hypercube vertices and the state of a coupled pair of walks.

Vertices of the n-dimensional binary hypercube are stored as bit vectors
packed into a python integer, one bit per coordinate, so flips and
Hamming distances cost O(n/64) words for any n.  Coordinate indices are
1-based in the public interface; index 0 is reserved for the identity
flip (no coordinate moves).
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np


class DimensionMismatchError(ValueError):
    """Raised when two vertices of different dimension are combined."""


@dataclass(frozen=True)
class Vertex:
    """A point of the n-dimensional binary hypercube."""

    n: int
    word: int = 0  # packed bits; bit (i-1) holds coordinate i

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension n must be a positive integer")
        if self.word < 0 or self.word >> self.n:
            raise ValueError("packed word has bits outside 1..n")

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "Vertex":
        bits = list(bits)
        word = 0
        for pos, v in enumerate(bits):
            if v not in (0, 1):
                raise ValueError(f"bit {pos + 1} is {v!r}, expected 0 or 1")
            word |= v << pos
        return cls(len(bits), word)

    @classmethod
    def zero(cls, n: int) -> "Vertex":
        return cls(n, 0)

    @classmethod
    def from_indices(cls, n: int, ones: Iterable[int]) -> "Vertex":
        """Vertex with coordinate i set to 1 for each i in ``ones`` (1-based)."""
        word = 0
        for i in ones:
            if not 1 <= i <= n:
                raise IndexError(f"coordinate {i} out of range 1..{n}")
            word |= 1 << (i - 1)
        return cls(n, word)

    def bit(self, i: int) -> int:
        """Value of coordinate i (1-based)."""
        if not 1 <= i <= self.n:
            raise IndexError(f"coordinate {i} out of range 1..{self.n}")
        return (self.word >> (i - 1)) & 1

    def bits(self) -> tuple[int, ...]:
        return tuple((self.word >> p) & 1 for p in range(self.n))

    def words(self) -> np.ndarray:
        """Packed representation as little-endian uint64 words (for kernels)."""
        nwords = (self.n + 63) // 64
        out = np.empty(nwords, dtype=np.uint64)
        w = self.word
        for idx in range(nwords):
            out[idx] = w & 0xFFFFFFFFFFFFFFFF
            w >>= 64
        return out

    @classmethod
    def from_words(cls, n: int, words: np.ndarray) -> "Vertex":
        w = 0
        for idx in range(len(words) - 1, -1, -1):
            w = (w << 64) | int(words[idx])
        return cls(n, w)

    def __str__(self):
        return "".join(str(b) for b in self.bits())


def hamming(x: Vertex, y: Vertex) -> int:
    """Number of coordinates where x and y differ."""
    if x.n != y.n:
        raise DimensionMismatchError(f"dimension mismatch: {x.n} != {y.n}")
    return (x.word ^ y.word).bit_count()


def flip(x: Vertex, i: int) -> Vertex:
    """Toggle coordinate i of x; i = 0 is the identity."""
    if i == 0:
        return x
    if not 1 <= i <= x.n:
        raise IndexError(f"flip index {i} out of range 0..{x.n}")
    return Vertex(x.n, x.word ^ (1 << (i - 1)))


@dataclass(frozen=True)
class CouplingState:
    """A coupled pair (x, y) with its unmatched-coordinate set cached.

    ``unmatched`` is the sorted tuple of 1-based coordinates where x and
    y disagree; ``n_unmatched`` is its size (the Hamming distance).  A
    companion bitmask gives O(1) membership tests during incremental
    updates.
    """

    x: Vertex
    y: Vertex
    unmatched: tuple[int, ...]
    n_unmatched: int
    diff_mask: int = field(repr=False, default=0)

    @property
    def n(self) -> int:
        return self.x.n

    def matched(self) -> tuple[int, ...]:
        """The complement of the unmatched set in 1..n."""
        u = set(self.unmatched)
        return tuple(i for i in range(1, self.n + 1) if i not in u)

    def is_unmatched(self, i: int) -> bool:
        return bool((self.diff_mask >> (i - 1)) & 1)

    def check_invariants(self) -> None:
        recomputed = make_state(self.x, self.y)
        if recomputed.unmatched != self.unmatched:
            raise AssertionError("unmatched set out of sync with (x, y)")
        if self.n_unmatched != len(self.unmatched):
            raise AssertionError("n_unmatched out of sync with unmatched")
        if self.diff_mask != (self.x.word ^ self.y.word):
            raise AssertionError("diff mask out of sync with (x, y)")


def make_state(x: Vertex, y: Vertex) -> CouplingState:
    """Build a CouplingState, computing the unmatched set from scratch."""
    if x.n != y.n:
        raise DimensionMismatchError(f"dimension mismatch: {x.n} != {y.n}")
    diff = x.word ^ y.word
    unmatched = []
    pos = 1
    d = diff
    while d:
        if d & 1:
            unmatched.append(pos)
        d >>= 1
        pos += 1
    return CouplingState(x, y, tuple(unmatched), len(unmatched), diff)


def apply_event(state: CouplingState, i: int, j: int) -> CouplingState:
    """Apply the joint jump (i, j): flip coordinate i of x and j of y.

    Index 0 means the corresponding chain does not move.  The unmatched
    set is updated incrementally; a flip of coordinate c on exactly one
    chain toggles c's membership, while i == j leaves the set unchanged.
    """
    nx = flip(state.x, i)
    ny = flip(state.y, j)
    if i == j:
        return CouplingState(nx, ny, state.unmatched, state.n_unmatched,
                             state.diff_mask)
    mask = state.diff_mask
    items = list(state.unmatched)
    for c in (i, j):
        if c == 0:
            continue
        bit = 1 << (c - 1)
        if mask & bit:
            items.remove(c)
        else:
            bisect.insort(items, c)
        mask ^= bit
    return CouplingState(nx, ny, tuple(items), len(items), mask)
