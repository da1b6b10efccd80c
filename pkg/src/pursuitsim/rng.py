"""Seed mixing and the per-stream generator.

Every random draw in the simulator comes from a :class:`SplitMix64` stream.
Streams are derived from an episode seed and an integer tag with
:func:`derive_seed`, so that each agent (and the spawn and vision
subsystems) consumes its own sequence.

Constants (Steele, Lea & Flood SplitMix64, finalizer variant 13)::

    gamma    = 0x9E3779B97F4A7C15
    mix64(z) = z ^= z >> 30; z *= 0xBF58476D1CE4E5B9
               z ^= z >> 27; z *= 0x94D049BB133111EB
               z ^= z >> 31                     (all mod 2**64)

    derive_seed(seed, tag)       = mix64(seed ^ mix64(tag + gamma))
    replication_seed(s, i, j)    = mix64(s ^ ((i << 32) | j))
    next():  state += gamma; return mix64(state)
    below(n) = ((next() >> 32) * n) >> 32
    random() = (next() >> 11) * 2**-53
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

# Reserved stream tags; agent streams use (salt << 32) | agent_id.
SPAWN_TAG = 1 << 62
VISION_TAG = (1 << 62) + 1
HAZARD_LAYOUT_TAG = (1 << 62) + 2


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, tag: int) -> int:
    """Seed of the substream identified by ``tag`` under ``seed``."""
    return mix64((seed & MASK64) ^ mix64(tag + GAMMA))


def agent_stream_tag(agent_id: int, salt: int = 0) -> int:
    return ((salt & 0x3FFFFFFF) << 32) | (agent_id & 0xFFFFFFFF)


def replication_seed(base_seed: int, value_index: int, replication: int) -> int:
    """Episode seed for replication ``replication`` of sweep value ``value_index``."""
    f = ((value_index & 0xFFFFFFFF) << 32) | (replication & 0xFFFFFFFF)
    return mix64((base_seed & MASK64) ^ f)


class SplitMix64:
    """Minimal 64-bit generator; trivially reproducible in any language."""

    __slots__ = ("state",)

    def __init__(self, seed: int) -> None:
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * _M1) & MASK64
        z = ((z ^ (z >> 27)) * _M2) & MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Integer in ``[0, n)`` by 32-bit multiply-shift (bias < n / 2**32)."""
        return ((self.next_u64() >> 32) * n) >> 32

    def random(self) -> float:
        """Float in ``[0, 1)`` with 53 random bits."""
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()
