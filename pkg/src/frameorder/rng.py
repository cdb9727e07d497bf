"""Deterministic, implementation-independent randomness.

Shuffle order is part of the manifest format contract, so the generator is
pinned down exactly rather than delegated to whatever random module the host
language ships:

* Stream: SplitMix64. State update ``s += 0x9E3779B97F4A7C15`` (mod 2^64),
  output finalizer ``z ^= z>>30; z *= 0xBF58476D1CE4E5B9; z ^= z>>27;
  z *= 0x94D049BB133111EB; z ^= z>>31``.
* Bounded draws: ``next_uint64() % n`` (the modulo bias is below 2^-40 for
  every n this tool ever uses and keeps the contract one line long).
* Shuffle: Fisher-Yates, descending, ``j = next_below(i + 1)``.
* Sub-seeds: children are consecutive outputs of a SplitMix64 stream seeded
  with the parent seed, drawn in documented call order.

Any re-implementation that follows these four rules reproduces manifests
bit-for-bit.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    """SplitMix64 pseudo-random stream over 64-bit unsigned integers."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_uint64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("bound must be positive")
        return self.next_uint64() % n


def fisher_yates(items: list, seed: int) -> None:
    """Shuffle ``items`` in place with a SplitMix64-driven Fisher-Yates."""
    rng = SplitMix64(seed)
    for i in range(len(items) - 1, 0, -1):
        j = rng.next_below(i + 1)
        items[i], items[j] = items[j], items[i]


def derive_seeds(seed: int, count: int) -> list[int]:
    """Derive ``count`` independent child seeds from ``seed``."""
    rng = SplitMix64(seed)
    return [rng.next_uint64() for _ in range(count)]
