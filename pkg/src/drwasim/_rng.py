"""Small deterministic RNG used by the routing kernels.

The evolutionary search needs a generator that behaves bit-for-bit the same
in the compiled kernel and in the pure-Python fallback, so both implement
splitmix64 with identical integer semantics.  Traffic generation does not
share this constraint and uses numpy's PCG64 instead (see `traffic`).
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """splitmix64 stream; `next_u64` matches the C implementation exactly."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def randint(self, n: int) -> int:
        """Integer in [0, n). Plain modulo; bias is negligible for small n."""
        return self.next_u64() % n

    def clone(self) -> "SplitMix64":
        c = SplitMix64(0)
        c.state = self.state
        return c


def derive_seed(seed: int, domain: int) -> int:
    """Derive an independent 64-bit stream seed for a subsystem.

    Distinct `domain` tags keep the traffic, search, and wavelength-assignment
    streams decorrelated even when the user passes the same base seed to all
    of them.
    """
    ss = np.random.SeedSequence([seed & _MASK64, domain])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
