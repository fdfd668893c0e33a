"""Ring-blocked sequence spaces and the analysis/synthesis maps of the kernel system.

Coefficient families ``x = {x_{k,j}}`` live in the l1-of-l2 space (sum over
rings of per-ring Euclidean norms); analysis sequences
``y_{k,j} = <Khat_{k,j}, g>`` live in its dual, the l-infinity-of-l2 space.
Here ``Khat_{k,j}`` is the normalized Szego kernel at grid node ``(k, j)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .discrete_norms import C_UPPER, dilated_ring_norms
from .grid import Grid
from .hardy_core import HardyFunction, evaluate, h2_norm

#: ``sqrt(2) * (1 - e^-2)^(-1/2)``: upper frame bound for the normalized kernels.
FRAME_UPPER = math.sqrt(2.0) * C_UPPER


def _ring_count(n: int) -> int:
    K = (math.isqrt(8 * n + 1) - 1) // 2
    if K * (K + 1) // 2 != n:
        raise ValueError(f"{n} entries do not fill a whole number of rings")
    return K


class _RingBlocked:
    """Flat ring-major storage of a family indexed by ``(k, j)``, ``0 <= j < k``."""

    __slots__ = ("values", "K")

    def __init__(self, values, K: int | None = None):
        v = np.array(values, dtype=np.complex128).reshape(-1)
        if K is None:
            K = _ring_count(v.size)
        elif v.size != K * (K + 1) // 2:
            raise ValueError(f"expected {K * (K + 1) // 2} entries for K={K}, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise ValueError("entries must be finite")
        v.setflags(write=False)
        self.values = v
        self.K = int(K)

    @classmethod
    def from_blocks(cls, blocks: Sequence[Sequence[complex]]):
        for k, b in enumerate(blocks, start=1):
            if len(b) != k:
                raise ValueError(f"block {k} has length {len(b)}, expected {k}")
        flat = [z for b in blocks for z in b]
        return cls(flat, len(blocks))

    @classmethod
    def zeros(cls, K: int):
        return cls(np.zeros(K * (K + 1) // 2), K)

    @classmethod
    def one_hot(cls, K: int, k: int, j: int, value=1.0):
        v = np.zeros(K * (K + 1) // 2, dtype=np.complex128)
        v[k * (k - 1) // 2 + j] = value
        return cls(v, K)

    @property
    def starts(self) -> np.ndarray:
        k = np.arange(1, self.K + 1)
        return k * (k - 1) // 2

    @property
    def blocks(self) -> list[np.ndarray]:
        return [self.values[s : s + k] for k, s in enumerate(self.starts, start=1)]

    def block(self, k: int) -> np.ndarray:
        s = k * (k - 1) // 2
        return self.values[s : s + k]

    def block_norms(self) -> np.ndarray:
        return np.sqrt(np.add.reduceat(np.abs(self.values) ** 2, self.starts))

    def to_json(self) -> dict:
        return {
            "K": self.K,
            "blocks": [[[float(z.real), float(z.imag)] for z in b] for b in self.blocks],
        }

    @classmethod
    def from_json(cls, obj):
        try:
            blocks = [[complex(float(re), float(im)) for re, im in b] for b in obj["blocks"]]
            K = int(obj["K"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed ring-blocked JSON: {exc}") from exc
        if K != len(blocks):
            raise ValueError(f"K={K} disagrees with {len(blocks)} blocks")
        return cls.from_blocks(blocks)

    def __repr__(self):
        return f"{type(self).__name__}(K={self.K})"


class MixedCoefficients(_RingBlocked):
    """Coefficient family measured in the l1(l2) norm."""

    __slots__ = ()


class AnalysisSequence(_RingBlocked):
    """Pairings with the normalized kernels, measured in the l-inf(l2) norm."""

    __slots__ = ()


@dataclass(frozen=True)
class FrameBoundEstimate:
    A_emp: float
    B_emp: float
    sample_count: int
    K: int
    ratios: tuple = ()


def norm_1_2(x: _RingBlocked) -> float:
    total = 0.0
    for v in x.block_norms():
        total += float(v)
    return total


def norm_inf_2(y: _RingBlocked) -> float:
    return float(np.max(y.block_norms()))


def duality_pair(x: MixedCoefficients, y: AnalysisSequence) -> complex:
    """Bilinear pairing ``sum_k sum_j x_{k,j} y_{k,j}`` (no conjugation)."""
    if x.K != y.K:
        raise ValueError(f"ring counts differ: {x.K} vs {y.K}")
    total = 0j
    for xb, yb in zip(x.blocks, y.blocks):
        total += complex(np.sum(xb * yb))
    return total


def analysis_map(g: HardyFunction, grid: Grid) -> AnalysisSequence:
    """Pair ``g`` with every normalized kernel on the grid.

    With the inner product conjugate-linear in its second slot, the pairing
    is ``<Khat_lambda, g> = weight * conj(g(lambda))``. Values are obtained by
    direct evaluation at the nodes.
    """
    vals = evaluate(g, grid.points)
    return AnalysisSequence(grid.weights * np.conj(vals), grid.K)


def synthesis_partial_sum(x: MixedCoefficients, grid: Grid, M: int) -> HardyFunction:
    """``sum_{k,j} x_{k,j} Khat_{k,j}`` with kernels truncated at degree ``M``."""
    return HardyFunction(ring_partial_sums(x, grid, M)[-1])


def ring_partial_sums(x: MixedCoefficients, grid: Grid, M: int) -> np.ndarray:
    """Coefficients of the synthesis sum through rings ``1..kappa``, one row per ``kappa``."""
    if M < 0:
        raise ValueError("truncation M must be nonnegative")
    if grid.K < x.K:
        raise ValueError(f"grid has {grid.K} rings but coefficients need {x.K}")
    m = np.arange(M + 1)
    out = np.empty((x.K, M + 1), dtype=np.complex128)
    acc = np.zeros(M + 1, dtype=np.complex128)
    for k in range(1, x.K + 1):
        sl = grid.ring_slice(k)
        xb = x.block(k)
        if np.any(xb):
            cols = np.conj(grid.points[sl])[None, :] ** m[:, None]
            acc = acc + cols @ (grid.weights[sl] * xb)
        out[k - 1] = acc
    return out


def synthesis_tail(x: MixedCoefficients, grid: Grid, M: int) -> float:
    """Upper bound on the H^2 norm lost by truncating every kernel at degree ``M``."""
    pts = grid.points[: x.values.size]
    return float(np.sum(np.abs(x.values) * np.abs(pts) ** (M + 1)))


def frame_ratio(g: HardyFunction, grid: Grid) -> float:
    return norm_inf_2(analysis_map(g, grid)) / h2_norm(g)


def frame_bounds_empirical(samples: Iterable[HardyFunction], grid: Grid) -> FrameBoundEstimate:
    """Smallest and largest ratio ``||analysis(g)||_{inf,2} / ||g||`` over ``samples``."""
    ratios = []
    for g in samples:
        if g.is_zero:
            raise ValueError("frame ratio undefined for the zero function")
        if g.degree >= grid.K:
            raise ValueError(f"sample degree {g.degree} must be below the ring count {grid.K}")
        ratios.append(frame_ratio(g, grid))
    if not ratios:
        raise ValueError("no samples given")
    return FrameBoundEstimate(min(ratios), max(ratios), len(ratios), grid.K, tuple(ratios))


def frame_lower_bound(K: int, degree: int) -> float:
    """Certified lower frame ratio for polynomials of the given degree on ``K`` rings."""
    return (1.0 - 1.0 / K) ** degree


def ds_ring_increments(f: HardyFunction, K: int) -> np.ndarray:
    """Per-ring sums ``sum_j |<f, Khat_{k,j}>|^2`` for ``k = 1..K``.

    Ring ``k`` contributes ``(2 - 1/k) * ||dilate(f, 1-1/k)||_k^2``.
    """
    if f.is_zero:
        raise ValueError("the zero function has no divergent frame sum")
    k = np.arange(1, K + 1)
    return (2.0 - 1.0 / k) * dilated_ring_norms(f, K) ** 2


def ds_frame_divergence(f: HardyFunction, K: int) -> np.ndarray:
    """Partial sums ``S_1..S_K`` of the squared pairings over whole rings.

    These grow linearly in ``K``, so no finite upper bound of the form
    ``sum_n |<f, Khat_n>|^2 <= B ||f||^2`` exists for this system.
    """
    inc = ds_ring_increments(f, K)
    out = np.empty(K)
    total = 0.0
    for i, v in enumerate(inc):
        total += float(v)
        out[i] = total
    return out
