"""Portable seeded random numbers (SplitMix64 + Box-Muller).

All stochastic pieces of the package (noise injection, multi-start
initialization) draw from this module instead of numpy's generators so that
streams are reproducible bit-for-bit independently of the numpy version.
"""

from __future__ import annotations

import numpy as np

_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)

# 2^-53, scales a 53-bit integer into [0, 1)
_INV53 = float(2.0**-53)


def _mix(z: np.ndarray) -> np.ndarray:
    # modular uint64 arithmetic throughout; overflow is the intended wraparound
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


def derive_seed(master: int, *indices: int) -> int:
    """Deterministic child seed from a master seed and an index path."""
    s = np.uint64(master & 0xFFFFFFFFFFFFFFFF)
    for idx in indices:
        with np.errstate(over="ignore"):
            s = (s + np.uint64((idx + 1) & 0xFFFFFFFFFFFFFFFF) * _GOLDEN) & _MASK
        s = _mix(s)
    return int(s)


class SplitMix64:
    """SplitMix64 stream with the standard golden-gamma increment."""

    def __init__(self, seed: int):
        self._state = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)

    def next_u64(self, n: int) -> np.ndarray:
        with np.errstate(over="ignore"):
            steps = (np.arange(1, n + 1, dtype=np.uint64) * _GOLDEN) & _MASK
            out = _mix((self._state + steps) & _MASK)
            self._state = (self._state + np.uint64(n) * _GOLDEN) & _MASK
        return out

    def uniform(self, n: int, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
        """n i.i.d. uniforms on [lo, hi)."""
        u = (self.next_u64(n) >> np.uint64(11)).astype(np.float64) * _INV53
        return lo + (hi - lo) * u

    def normal(self, n: int, std: float = 1.0) -> np.ndarray:
        """n i.i.d. centered normals via Box-Muller (pairwise, deterministic)."""
        m = (n + 1) // 2
        # u1 in (0, 1] so the log is finite
        u1 = ((self.next_u64(m) >> np.uint64(11)).astype(np.float64) + 1.0) * _INV53
        u2 = (self.next_u64(m) >> np.uint64(11)).astype(np.float64) * _INV53
        r = np.sqrt(-2.0 * np.log(u1))
        ang = 2.0 * np.pi * u2
        z = np.concatenate([r * np.cos(ang), r * np.sin(ang)])
        return std * z[:n]
