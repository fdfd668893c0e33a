"""Root-of-unity sampling norms and the dilation inequalities built on them.

``discrete_norm(f, k)`` is the root-mean-square of ``|f|`` over the k-th roots
of unity. Because ``z^m = z^(m mod k)`` on those points, the coefficients are
first folded modulo ``k`` and the samples are obtained from one size-``k``
inverse DFT, which is exact up to rounding for any degree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hardy_core import HardyFunction, dilate, h2_norm, l2_norm

#: ``(1 - e^-2)^(-1/2)``, the uniform constant bounding the dilated sampling norms.
C_UPPER = 1.0 / math.sqrt(-math.expm1(-2.0))

TOL = 1e-10


class PreconditionError(ValueError):
    """Raised when a verification is asked outside the range where it holds."""


@dataclass(frozen=True)
class DiscreteNormReport:
    """Outcome of one inequality check.

    ``margin`` is the slack in the direction of the inequality being
    checked, so a negative margin beyond tolerance is a violation. For the
    identity checks (``kind == "lemma3"``) it is ``bound - value``, which
    must be small in absolute value.
    """

    k: int
    r: float
    value: float
    bound: float
    margin: float
    kind: str = ""

    @property
    def ok(self) -> bool:
        if self.kind == "lemma3":
            return abs(self.margin) <= TOL * (1.0 + self.bound)
        return self.margin >= -TOL * max(1.0, abs(self.bound))


def roots_of_unity(k: int) -> np.ndarray:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    theta = 2.0 * np.pi * np.arange(k) / k
    return np.cos(theta) + 1j * np.sin(theta)


def fold(coeffs, k: int) -> np.ndarray:
    """Sum coefficients by residue class modulo ``k``."""
    c = np.asarray(coeffs, dtype=np.complex128)
    rows = -(-c.size // k)
    padded = np.zeros(rows * k, dtype=np.complex128)
    padded[: c.size] = c
    return padded.reshape(rows, k).sum(axis=0)


def root_values(f: HardyFunction, k: int) -> np.ndarray:
    """Values ``f(omega_k^j)``, ``j = 0..k-1``, via folding and an inverse DFT."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return k * np.fft.ifft(fold(f.coeffs, k))


def discrete_norm(f: HardyFunction, k: int) -> float:
    return l2_norm(root_values(f, k)) / np.sqrt(k)


def _dilated(f, k):
    # radius 1 - 1/k; ring 1 degenerates to evaluation at the origin
    if k == 1:
        return HardyFunction(f.coeffs[:1])
    return dilate(f, 1.0 - 1.0 / k)


def dilated_discrete_norm(f: HardyFunction, k: int) -> float:
    """``discrete_norm(dilate(f, 1 - 1/k), k)`` with the ``k = 1`` term ``|f(0)|``."""
    return discrete_norm(_dilated(f, k), k)


def dilated_ring_norms(f: HardyFunction, K: int) -> np.ndarray:
    """Array of :func:`dilated_discrete_norm` for ``k = 1..K``.

    Rings with ``k > degree(f)`` need no folding, and then the unitary DFT
    leaves the coefficient norm unchanged, so those rings are computed in one
    vectorized pass from the dilated coefficient norms. Rings with
    ``k <= degree(f)`` go through the folded DFT.
    """
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    c = f.coeffs[: f.degree + 1]
    deg = c.size - 1
    out = np.empty(K)
    out[0] = abs(c[0])
    small = min(deg, K)
    for k in range(2, small + 1):
        out[k - 1] = dilated_discrete_norm(f, k)
    if K > small:
        ks = np.arange(max(small + 1, 2), K + 1)
        if ks.size:
            power2 = np.abs(c) ** 2
            log_r = np.log1p(-1.0 / ks)
            scale = np.exp(2.0 * log_r[:, None] * np.arange(deg + 1)[None, :])
            out[ks - 1] = np.sqrt(scale @ power2)
    return out


def verify_lemma3(P: HardyFunction, k: int) -> DiscreteNormReport:
    """Check that sampling at k-th roots of unity preserves the norm of ``P``.

    Requires ``degree(P) < k``.
    """
    if P.degree >= k:
        raise PreconditionError(
            f"degree {P.degree} is not < k={k}: sampling at {k} roots of unity "
            "aliases higher coefficients, and the norm identity genuinely fails "
            "there; use k > degree"
        )
    value = discrete_norm(P, k)
    bound = h2_norm(P)
    return DiscreteNormReport(k, 1.0, value, bound, bound - value, "lemma3")


def lemma4_bound(f: HardyFunction, k: int, r: float) -> float:
    # 1 - r^(2k) without cancellation for r near 1
    return h2_norm(f) / math.sqrt(-math.expm1(2.0 * k * math.log(r)))


def verify_lemma4(f: HardyFunction, k: int, r: float) -> DiscreteNormReport:
    if not 0.0 < r < 1.0:
        raise ValueError(f"dilation radius must lie in (0, 1), got {r}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    value = discrete_norm(dilate(f, r), k)
    bound = lemma4_bound(f, k, r)
    return DiscreteNormReport(k, float(r), value, bound, bound - value, "lemma4")


def sup_dilated_norm(f: HardyFunction, K: int) -> float:
    return float(np.max(dilated_ring_norms(f, K)))


def argsup_dilated_norm(f: HardyFunction, K: int) -> tuple[int, float]:
    """Ring attaining the sup (smallest such ``k``) and the sup itself."""
    norms = dilated_ring_norms(f, K)
    i = int(np.argmax(norms))
    return i + 1, float(norms[i])


def verify_eq5(f: HardyFunction, K: int) -> tuple[DiscreteNormReport, DiscreteNormReport]:
    """Bracket ``sup_k ||dilate(f, 1-1/k)||_k`` between the two norm bounds.

    Returns ``(upper, lower)`` reports. The upper one checks the sup against
    ``C_UPPER * ||f||``; the lower one checks it against
    ``(1 - 1/K)^degree * ||f||``, which the ring ``k = K`` already certifies
    for polynomials of degree below ``K``.
    """
    deg = f.degree
    if K <= deg:
        raise PreconditionError(
            f"K={K} must exceed degree {deg} to certify the lower bound; "
            f"raise --rings to at least {deg + 1}"
        )
    k, value = argsup_dilated_norm(f, K)
    norm = h2_norm(f)
    r = 1.0 - 1.0 / k
    upper = C_UPPER * norm
    lower = (1.0 - 1.0 / K) ** deg * norm
    return (
        DiscreteNormReport(k, r, value, upper, upper - value, "eq5_upper"),
        DiscreteNormReport(k, r, value, lower, value - lower, "eq5_lower"),
    )
