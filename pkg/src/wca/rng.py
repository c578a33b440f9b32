"""Portable seeded random streams for crop sampling.

Crop specs must reproduce bit-for-bit across implementations (the offline
embedding exporter regenerates them in another language), so this module
pins a fully documented generator instead of a platform RNG:

* SplitMix64 (Steele, Lea, and Flanagan, 2014) as the core 64-bit stream.
* FNV-1a 64 to hash image ids into stream seeds.
* One independent stream per image: ``state0 = fnv1a64(utf8(image_id)) XOR
  mix64(global_seed)`` where ``mix64(s)`` is the first SplitMix64 output for
  state ``s``. The global seed is reduced modulo 2**64 (two's complement for
  negatives).
* Floats: ``u01() = (next() >> 11) / 2**53`` in [0, 1).
* Bounded ints: ``below(k) = next() % k``. The modulo bias is immaterial for
  k up to image dimensions and keeps the rule portable.

Every draw consumes exactly one ``next()`` call, in a fixed order defined by
the callers, so two implementations agree on whole spec sequences.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash of a byte string."""
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK
    return h


def mix64(seed: int) -> int:
    """First SplitMix64 output for the given state; spreads low-entropy seeds."""
    return SplitMix64(seed).next_u64()


def stream_seed(global_seed: int, image_id: str) -> int:
    """Derive the per-image stream state from the global seed and image id."""
    return fnv1a64(image_id.encode("utf-8")) ^ mix64(global_seed)


class SplitMix64:
    """SplitMix64 generator over a 64-bit state."""

    __slots__ = ("state",)

    def __init__(self, state: int):
        self.state = state & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def u01(self) -> float:
        """Uniform double in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def uniform(self, lo: float, hi: float) -> float:
        """Uniform double in [lo, hi); returns lo when lo == hi."""
        return lo + (hi - lo) * self.u01()

    def below(self, n: int) -> int:
        """Uniform integer in {0, ..., n-1}; n must be positive."""
        if n <= 0:
            raise ValueError("below() requires a positive bound")
        return self.next_u64() % n


def stream_for_image(global_seed: int, image_id: str) -> SplitMix64:
    """The per-image crop sampling stream."""
    return SplitMix64(stream_seed(global_seed, image_id))
