"""Randomness streams shared by every protocol step.

All protocol code draws randomness through a small interface (``bit``,
``born``, ``permutation``, ``beacon``). :class:`Stream` backs it with a seeded
numpy generator; :class:`BranchStream` backs it with an explicit choice path so
that :func:`enumerate_branches` can walk every branch of a protocol run and
attach its exact probability.

Per-run streams are derived with ``SeedSequence(seed, spawn_key=(run_index,))``,
so run ``k`` of a batch can be replayed in isolation from ``(seed, k)``.
"""

from __future__ import annotations

import math
from typing import Callable, Iterator, TypeVar

import numpy as np

T = TypeVar("T")

SEED_BITS = 64
# Born probabilities below this are treated as impossible branches.
PRUNE_TOL = 1e-14


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < 2**SEED_BITS:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


class Stream:
    """Seeded randomness source for a single simulation run."""

    def __init__(self, generator: np.random.Generator):
        self.gen = generator

    @classmethod
    def for_run(cls, seed: int, run_index: int = 0) -> "Stream":
        ss = np.random.SeedSequence(check_seed(seed), spawn_key=(int(run_index),))
        return cls(np.random.Generator(np.random.PCG64(ss)))

    def bit(self) -> int:
        return int(self.gen.integers(2))

    def bits(self, k: int) -> np.ndarray:
        return self.gen.integers(2, size=k)

    def uniform(self) -> float:
        return float(self.gen.random())

    def born(self, p0: float) -> int:
        """Pick a measurement outcome, consuming exactly one uniform deviate."""
        return 0 if self.gen.random() < p0 else 1

    def permutation(self, k: int) -> list[int]:
        return [int(i) for i in self.gen.permutation(k)]

    def beacon(self, d_param: int) -> int:
        """Return 1 with probability exactly ``1/d_param``."""
        return 1 if int(self.gen.integers(d_param)) == 0 else 0


def as_stream(rng) -> Stream | "BranchStream":
    if isinstance(rng, (Stream, BranchStream)):
        return rng
    if isinstance(rng, np.random.Generator):
        return Stream(rng)
    if isinstance(rng, (int, np.integer)):
        return Stream.for_run(int(rng))
    raise TypeError(f"cannot build a randomness stream from {type(rng).__name__}")


def _unrank_permutation(rank: int, k: int) -> list[int]:
    items = list(range(k))
    out = []
    for i in range(k, 0, -1):
        f = math.factorial(i - 1)
        idx, rank = divmod(rank, f)
        out.append(items.pop(idx))
    return out


class BranchStream:
    """Replays a fixed prefix of choices, then takes the first alternative.

    Every draw is a choice point. ``trail`` records ``(choice, n_alternatives)``
    and ``weight`` the product of the chosen alternatives' probabilities.
    With ``shuffles=False`` permutations are not branched on: the identity is
    returned with weight 1. That is exact for any observable that keeps sender
    labels, because the shuffle is drawn independently of everything else.
    """

    def __init__(self, prefix: list[int] | None = None, shuffles: bool = True):
        self.prefix = list(prefix or [])
        self.shuffles = shuffles
        self.trail: list[tuple[int, int]] = []
        self.weight = 1.0

    def _choose(self, n_alts: int) -> int:
        pos = len(self.trail)
        c = self.prefix[pos] if pos < len(self.prefix) else 0
        self.trail.append((c, n_alts))
        return c

    def bit(self) -> int:
        c = self._choose(2)
        self.weight *= 0.5
        return c

    def bits(self, k: int) -> np.ndarray:
        return np.array([self.bit() for _ in range(k)], dtype=np.int64)

    def uniform(self) -> float:
        raise TypeError("continuous draws cannot be enumerated")

    def born(self, p0: float) -> int:
        alts = [(o, p) for o, p in ((0, p0), (1, 1.0 - p0)) if p > PRUNE_TOL]
        o, p = alts[self._choose(len(alts))]
        self.weight *= p
        return o

    def permutation(self, k: int) -> list[int]:
        if not self.shuffles or k <= 1:
            return list(range(k))
        total = math.factorial(k)
        c = self._choose(total)
        self.weight /= total
        return _unrank_permutation(c, k)

    def beacon(self, d_param: int) -> int:
        if d_param == 1:
            return 1
        c = self._choose(2)
        self.weight *= (d_param - 1) / d_param if c == 0 else 1.0 / d_param
        return 1 if c == 1 else 0


def enumerate_branches(
    fn: Callable[[BranchStream], T], shuffles: bool = True
) -> Iterator[tuple[float, T]]:
    """Yield ``(probability, fn(stream))`` for every branch of ``fn``.

    ``fn`` must be deterministic given its stream. Branches are visited in
    lexicographic order of their choice paths.
    """
    prefix: list[int] = []
    while True:
        stream = BranchStream(prefix, shuffles=shuffles)
        result = fn(stream)
        yield stream.weight, result
        trail = stream.trail
        while trail and trail[-1][0] + 1 >= trail[-1][1]:
            trail.pop()
        if not trail:
            return
        prefix = [c for c, _ in trail[:-1]] + [trail[-1][0] + 1]
