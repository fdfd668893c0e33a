"""Portable seeded generator for test polynomials.

The generator is the 64-bit linear congruential recurrence

    state <- (6364136223846793005 * state + 1442695040888963407) mod 2**64

started from ``state = seed mod 2**64``. Each draw advances the state once and
returns ``((state >> 11) + 0.5) / 2**53``, a double strictly inside (0, 1).
Random coefficients take two consecutive draws, real part first, so they lie
in the open complex unit square (0, 1) x (0, 1). Anything that reimplements
these three lines reproduces the same suites from the same seed.
"""

from __future__ import annotations

import numpy as np

from .frame_analysis import MixedCoefficients
from .hardy_core import HardyFunction

_A = 6364136223846793005
_C = 1442695040888963407
_MASK = (1 << 64) - 1
_SCALE = 1.0 / (1 << 53)


class LCG:
    def __init__(self, seed: int = 0):
        self.state = int(seed) & _MASK

    def uniform(self) -> float:
        self.state = (_A * self.state + _C) & _MASK
        return ((self.state >> 11) + 0.5) * _SCALE

    def uniforms(self, n: int) -> np.ndarray:
        return np.array([self.uniform() for _ in range(n)])

    def randint(self, lo: int, hi: int) -> int:
        """Integer uniform on ``lo..hi`` inclusive."""
        return lo + int(self.uniform() * (hi - lo + 1))

    def complex_unit_square(self, n: int) -> np.ndarray:
        u = self.uniforms(2 * n)
        return u[0::2] + 1j * u[1::2]

    def polynomial(self, degree: int) -> HardyFunction:
        """Polynomial of exactly ``degree``; draws never hit zero."""
        return HardyFunction(self.complex_unit_square(degree + 1))

    def polynomial_up_to(self, max_degree: int) -> HardyFunction:
        """Degree drawn uniformly from ``0..max_degree`` first, then coefficients."""
        return self.polynomial(self.randint(0, max_degree))

    def mixed_coefficients(self, K: int) -> MixedCoefficients:
        return MixedCoefficients(self.complex_unit_square(K * (K + 1) // 2), K)
