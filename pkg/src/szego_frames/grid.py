"""Ring grid of scaled roots of unity.

Ring ``k`` carries the ``k`` points ``(1 - 1/k) exp(2 pi i j / k)``,
``j = 0..k-1``. Nodes are enumerated ring-major with a 1-based flat index,
so ring ``k`` occupies flat positions ``k(k-1)/2 + 1 .. k(k+1)/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np


class RingIndex(NamedTuple):
    k: int
    j: int


@dataclass(frozen=True)
class GridNode:
    index: RingIndex
    point: complex
    weight: float


def _check_ring_index(k, j):
    if k < 1:
        raise ValueError(f"ring number must be >= 1, got {k}")
    if not 0 <= j < k:
        raise ValueError(f"position j={j} out of range for ring k={k}")


def ring_radius(k: int) -> float:
    return 1.0 - 1.0 / k


def ring_weight(k: int) -> float:
    """``(1 - (1 - 1/k)^2)^(1/2)``, evaluated as ``sqrt(2/k - 1/k^2)``."""
    return math.sqrt((2.0 - 1.0 / k) / k)


def node(k: int, j: int) -> GridNode:
    _check_ring_index(k, j)
    r = ring_radius(k)
    theta = 2.0 * math.pi * j / k
    return GridNode(RingIndex(k, j), complex(r * math.cos(theta), r * math.sin(theta)), ring_weight(k))


def flat_index(k: int, j: int) -> int:
    _check_ring_index(k, j)
    return k * (k - 1) // 2 + j + 1


def ring_index(n: int) -> RingIndex:
    """Inverse of :func:`flat_index`."""
    if n < 1:
        raise ValueError(f"flat index must be >= 1, got {n}")
    # largest k with k(k-1)/2 < n
    k = (1 + math.isqrt(8 * (n - 1) + 1)) // 2
    return RingIndex(k, n - 1 - k * (k - 1) // 2)


class Grid:
    """All nodes on rings ``1..K``, stored as flat ring-major arrays.

    Attributes
    ----------
    K : int
        Number of rings.
    ks, js : ndarray of int
        Ring number and position of every node.
    points : ndarray of complex
        Node locations.
    weights : ndarray of float
        Normalization weights ``(1 - |point|^2)^(1/2)``.
    starts : ndarray of int
        0-based offset of each ring in the flat arrays.
    """

    def __init__(self, K: int):
        if K < 1:
            raise ValueError(f"ring count must be >= 1, got {K}")
        self.K = int(K)
        sizes = np.arange(1, self.K + 1)
        self.starts = sizes * (sizes - 1) // 2
        self.ks = np.repeat(sizes, sizes)
        self.js = np.arange(self.ks.size) - np.repeat(self.starts, sizes)
        radii = 1.0 - 1.0 / self.ks
        theta = 2.0 * np.pi * self.js / self.ks
        self.points = radii * np.cos(theta) + 1j * (radii * np.sin(theta))
        self.weights = np.sqrt((2.0 - 1.0 / self.ks) / self.ks)
        for arr in (self.starts, self.ks, self.js, self.points, self.weights):
            arr.setflags(write=False)

    @property
    def size(self) -> int:
        return self.K * (self.K + 1) // 2

    def __len__(self):
        return self.size

    def ring_slice(self, k: int) -> slice:
        if not 1 <= k <= self.K:
            raise ValueError(f"ring {k} not in grid with K={self.K}")
        s = k * (k - 1) // 2
        return slice(s, s + k)

    def ring(self, k: int) -> list[GridNode]:
        sl = self.ring_slice(k)
        return [
            GridNode(RingIndex(k, int(j)), complex(p), float(w))
            for j, p, w in zip(self.js[sl], self.points[sl], self.weights[sl])
        ]

    @property
    def rings(self) -> list[list[GridNode]]:
        return [self.ring(k) for k in range(1, self.K + 1)]

    def __iter__(self) -> Iterator[GridNode]:
        for k in range(1, self.K + 1):
            yield from self.ring(k)


def build_grid(K: int) -> Grid:
    return Grid(K)


def blaschke_partial_sum(K: int) -> float:
    """Sum of ``1 - |lambda|`` over all nodes on rings ``1..K``.

    Every ring contributes ``k * (1/k) = 1``, so the sum equals ``K`` and the
    Blaschke condition fails for the full grid.
    """
    if K < 1:
        raise ValueError(f"ring count must be >= 1, got {K}")
    total = 0.0
    for k in range(1, K + 1):
        total += k * (1.0 - ring_radius(k))
    return total
