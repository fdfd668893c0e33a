"""Hardy space H^2 functions as truncated power series.

A function f(z) = sum_m c_m z^m is stored as the array of its Taylor
coefficients. The inner product is linear in the first argument and
conjugate-linear in the second, so that ``h2_inner(f, kernel_function(lam, M))``
reproduces ``f(lam)``.
"""

from __future__ import annotations

import numbers

import numpy as np


def _as_finite_complex(z, name="z"):
    z = complex(z)
    if not (np.isfinite(z.real) and np.isfinite(z.imag)):
        raise ValueError(f"{name} must be finite, got {z!r}")
    return z


def _check_disk_point(lam):
    lam = _as_finite_complex(lam, "lambda")
    if not abs(lam) < 1.0:
        raise ValueError(f"point {lam!r} is not in the open unit disk")
    return lam


class HardyFunction:
    """Truncated element of H^2 given by its Taylor coefficients.

    Parameters
    ----------
    coeffs : array_like
        Complex coefficients ``c_0, ..., c_M``. Trailing zeros are kept.

    Notes
    -----
    The coefficient array is copied and made read-only, so instances can
    be shared freely between threads.
    """

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs):
        c = np.array(coeffs, dtype=np.complex128).reshape(-1)
        if c.size == 0:
            c = np.zeros(1, dtype=np.complex128)
        if not np.all(np.isfinite(c)):
            raise ValueError("Taylor coefficients must be finite")
        c.setflags(write=False)
        self._coeffs = c

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def degree(self) -> int:
        """Largest index with a nonzero coefficient (0 for the zero function)."""
        nz = np.flatnonzero(self._coeffs)
        return int(nz[-1]) if nz.size else 0

    @property
    def is_zero(self) -> bool:
        return not np.any(self._coeffs)

    def __len__(self):
        return self._coeffs.size

    def __call__(self, z):
        return evaluate(self, z)

    def __add__(self, other):
        a, b = _zero_extend(self._coeffs, other.coeffs)
        return HardyFunction(a + b)

    def __sub__(self, other):
        a, b = _zero_extend(self._coeffs, other.coeffs)
        return HardyFunction(a - b)

    def __mul__(self, alpha):
        if not isinstance(alpha, numbers.Number):
            return NotImplemented
        return HardyFunction(self._coeffs * alpha)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, HardyFunction):
            return NotImplemented
        a, b = _zero_extend(self._coeffs, other.coeffs)
        return bool(np.array_equal(a, b))

    def __hash__(self):
        return hash(np.trim_zeros(self._coeffs, "b").tobytes())

    def __repr__(self):
        return f"HardyFunction({self._coeffs.tolist()!r})"

    def to_json(self) -> dict:
        return {"coeffs": [[float(c.real), float(c.imag)] for c in self._coeffs]}

    @classmethod
    def from_json(cls, obj) -> "HardyFunction":
        try:
            pairs = obj["coeffs"]
            return cls([complex(float(re), float(im)) for re, im in pairs])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed HardyFunction JSON: {exc}") from exc

    @classmethod
    def monomial(cls, m: int, scale=1.0) -> "HardyFunction":
        c = np.zeros(m + 1, dtype=np.complex128)
        c[m] = scale
        return cls(c)


def _zero_extend(a, b):
    n = max(a.size, b.size)
    return (np.pad(a, (0, n - a.size)), np.pad(b, (0, n - b.size)))


def evaluate(f: HardyFunction, z):
    """Evaluate ``f`` at ``z`` by Horner's rule.

    ``z`` may be a scalar or an array of points; the recurrence runs from the
    highest stored coefficient down in a fixed order.
    """
    scalar = np.ndim(z) == 0
    zz = np.asarray(z, dtype=np.complex128)
    if not np.all(np.isfinite(zz)):
        raise ValueError("evaluation point must be finite")
    c = f.coeffs
    acc = np.full(zz.shape, c[-1], dtype=np.complex128)
    for cm in c[-2::-1]:
        acc = acc * zz + cm
    return complex(acc) if scalar else acc


def h2_inner(f: HardyFunction, g: HardyFunction) -> complex:
    """Return ``sum_m c_m(f) * conj(c_m(g))``."""
    n = min(len(f), len(g))
    return complex(np.sum(f.coeffs[:n] * np.conj(g.coeffs[:n])))


def l2_norm(v) -> float:
    """Euclidean norm, rescaled so tiny or huge entries do not under/overflow."""
    a = np.abs(np.asarray(v))
    top = a.max(initial=0.0)
    if top == 0.0 or not np.isfinite(top):
        return float(top)
    return float(top * np.sqrt(np.sum((a / top) ** 2)))


def h2_norm(f: HardyFunction) -> float:
    return l2_norm(f.coeffs)


def dilate(f: HardyFunction, r: float) -> HardyFunction:
    """Return ``z -> f(r z)``, i.e. coefficients ``c_m r^m``, for 0 < r < 1."""
    r = float(r)
    if not 0.0 < r < 1.0:
        raise ValueError(f"dilation radius must lie in (0, 1), got {r}")
    return HardyFunction(f.coeffs * r ** np.arange(len(f)))


def szego_kernel_value(z, lam) -> complex:
    """Szego kernel ``1 / (1 - conj(lam) z)``."""
    z = _as_finite_complex(z)
    lam = _check_disk_point(lam)
    if abs(z) > 1.0:
        raise ValueError(f"|z| must not exceed 1, got {abs(z)}")
    return 1.0 / (1.0 - lam.conjugate() * z)


def kernel_function(lam, M: int) -> HardyFunction:
    """Degree-``M`` Taylor truncation of the kernel at ``lam``: ``conj(lam)^m``.

    The truncation error at any ``|z| <= 1`` is at most
    ``|lam|^(M+1) / (1 - |lam|)``; see :func:`kernel_tail_bound`.
    """
    lam = _check_disk_point(lam)
    if M < 0:
        raise ValueError("truncation M must be nonnegative")
    return HardyFunction(np.conj(lam) ** np.arange(M + 1))


def normalized_kernel_function(lam, M: int) -> HardyFunction:
    lam = _check_disk_point(lam)
    weight = np.sqrt(1.0 - abs(lam) ** 2)
    return HardyFunction(weight * kernel_function(lam, M).coeffs)


def kernel_tail_bound(lam, M: int) -> float:
    """Sup-norm bound on the closed disk for the discarded kernel tail."""
    a = abs(lam)
    return a ** (M + 1) / (1.0 - a)


def normalized_kernel_tail(lam, M: int) -> float:
    """H^2 norm of the part of the normalized kernel beyond degree ``M``.

    For the normalized kernel this is exactly ``|lam|^(M+1)``.
    """
    return abs(lam) ** (M + 1)
