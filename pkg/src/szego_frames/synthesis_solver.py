"""Explicit kernel-series coefficients for a target function.

Given ``f``, find ring-blocked coefficients ``x`` with
``f ~ sum_{k,j} x_{k,j} Khat_{k,j}`` by solving the ring-blocked group lasso

    minimize  1/2 ||A x - c(f)||_2^2 + mu * sum_k ||x_k||_2

with monotone FISTA and a halving continuation on ``mu``. After each
continuation stage the active rings are refit by least squares (pivoted QR
followed by a second QR for the minimum-norm solution) to remove shrinkage
bias. The penalty is exactly the l1(l2) norm of the coefficient space.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .frame_analysis import (
    FRAME_UPPER,
    MixedCoefficients,
    norm_1_2,
    ring_partial_sums,
    synthesis_tail,
)
from .grid import Grid
from .hardy_core import HardyFunction, h2_norm

log = logging.getLogger(__name__)

#: Relative residual under which a single ring is taken to reproduce the target.
EXACT_RING_TOL = 1e-12


class NonConvergence(UserWarning):
    """Residual target not met within the iteration budget; best iterate returned."""


class IllConditioned(ArithmeticError):
    """Power iteration for the Lipschitz constant did not settle."""


def default_truncation(degree: int) -> int:
    return max(2 * degree, 32)


@dataclass(frozen=True)
class SynthesisProblem:
    target: HardyFunction
    grid: Grid
    truncation: int | None = None

    def __post_init__(self):
        if self.truncation is None:
            object.__setattr__(self, "truncation", default_truncation(self.target.degree))
        if self.truncation < self.target.degree:
            raise ValueError(
                f"truncation {self.truncation} is below the target degree {self.target.degree}"
            )

    @property
    def M(self) -> int:
        return self.truncation

    def target_vector(self) -> np.ndarray:
        c = np.zeros(self.M + 1, dtype=np.complex128)
        n = min(len(self.target), self.M + 1)
        c[:n] = self.target.coeffs[:n]
        return c


@dataclass(frozen=True)
class SolverConfig:
    """Solver settings.

    ``mu`` overrides the initial penalty; when ``None`` it is
    ``mu0_factor`` times the largest per-ring norm of ``A^H c``.
    """

    mu: float | None = None
    tol: float = 1e-3
    max_iter: int = 5000
    continuation_steps: int = 8
    mu0_factor: float = 0.1
    stage_rtol: float = 1e-7
    power_rtol: float = 1e-6
    power_max_iter: int = 10000

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.continuation_steps < 1:
            raise ValueError("continuation_steps must be >= 1")
        if self.mu is not None and self.mu < 0:
            raise ValueError("mu must be nonnegative")


@dataclass
class Decomposition:
    x: MixedCoefficients
    residual_rel: float
    mixed_norm: float
    iterations: int
    partial_sum_sup: float
    status: str = "converged"
    prefix_residuals: list = field(default_factory=list)
    objective_trace: list = field(default_factory=list)
    stage_residuals: list = field(default_factory=list)
    mu_final: float = 0.0

    @property
    def converged(self) -> bool:
        return self.status != "nonconvergence"

    def to_json(self) -> dict:
        return {
            "x": self.x.to_json(),
            "residual_rel": self.residual_rel,
            "mixed_norm": self.mixed_norm,
            "iterations": self.iterations,
            "partial_sum_sup": self.partial_sum_sup,
            "status": self.status,
            "prefix_residuals": list(self.prefix_residuals),
            "objective_trace": list(self.objective_trace),
            "stage_residuals": list(self.stage_residuals),
            "mu_final": self.mu_final,
        }


def build_synthesis_matrix(grid: Grid, M: int) -> np.ndarray:
    """Column ``(k, j)`` holds ``weight_{k,j} * conj(lambda_{k,j})^m``, ``m = 0..M``."""
    if M < 0:
        raise ValueError("truncation M must be nonnegative")
    m = np.arange(M + 1)[:, None]
    return grid.weights[None, :] * np.conj(grid.points)[None, :] ** m


def lipschitz_constant(A: np.ndarray, rtol: float = 1e-6, max_iter: int = 10000) -> float:
    """Squared top singular value of ``A`` by power iteration from the all-ones vector.

    Stops once the eigen-residual ``||A^H A v - rho v||`` drops below
    ``rtol * rho``, which bounds the error of the Rayleigh quotient ``rho``.
    """
    v = np.ones(A.shape[1], dtype=np.complex128)
    v /= np.linalg.norm(v)
    for _ in range(max_iter):
        Av = A @ v
        rho = float(np.vdot(Av, Av).real)
        if rho == 0.0:
            return 0.0
        w = A.conj().T @ Av
        if np.linalg.norm(w - rho * v) <= rtol * rho:
            return rho
        v = w / np.linalg.norm(w)
    raise IllConditioned(f"power iteration did not settle to {rtol:g} in {max_iter} steps")


def _block_norms(x, starts):
    return np.sqrt(np.add.reduceat(np.abs(x) ** 2, starts))


def group_soft_threshold(v: np.ndarray, t: float, starts: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    """Proximal map of ``t * sum_k ||v_k||_2``: shrink each ring radially by ``t``."""
    n = _block_norms(v, starts)
    safe = np.where(n > 0, n, 1.0)
    scale = np.where(n > t, 1.0 - t / safe, 0.0)
    return v * np.repeat(scale, sizes)


def min_norm_lstsq(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Minimum-norm least-squares solution through a complete orthogonal decomposition."""
    m, n = A.shape
    if n == 0:
        return np.zeros(0, dtype=np.complex128)
    Q, R, piv = scipy.linalg.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0.0:
        return np.zeros(n, dtype=np.complex128)
    rank = int(np.sum(diag > diag[0] * max(m, n) * np.finfo(float).eps))
    R1 = R[:rank, :]
    rhs = Q[:, :rank].conj().T @ b
    Z, T = scipy.linalg.qr(R1.conj().T, mode="economic")
    u = scipy.linalg.solve_triangular(T, rhs, trans="C", lower=False)
    y = Z @ u
    x = np.zeros(n, dtype=np.complex128)
    x[piv] = y
    return x


class _Problem:
    """Matrix, target and ring layout shared by the solver stages."""

    def __init__(self, problem: SynthesisProblem):
        self.grid = problem.grid
        self.A = build_synthesis_matrix(problem.grid, problem.M)
        self.AH = self.A.conj().T
        self.c = problem.target_vector()
        self.cnorm = float(np.linalg.norm(self.c))
        K = problem.grid.K
        self.sizes = np.arange(1, K + 1)
        self.starts = self.sizes * (self.sizes - 1) // 2

    def residual(self, x):
        return float(np.linalg.norm(self.A @ x - self.c))

    def objective(self, x, mu):
        r = self.A @ x - self.c
        return 0.5 * float(np.vdot(r, r).real) + mu * float(np.sum(_block_norms(x, self.starts)))

    def ring_columns(self, active_rings):
        mask = np.repeat(active_rings, self.sizes)
        return np.flatnonzero(mask)

    def refit(self, active_rings):
        cols = self.ring_columns(active_rings)
        x = np.zeros(self.A.shape[1], dtype=np.complex128)
        if cols.size:
            x[cols] = min_norm_lstsq(self.A[:, cols], self.c)
        return x


def _exact_single_ring(p: _Problem):
    """Coefficients supported on the first ring that reproduces the target to rounding."""
    for k in p.sizes:
        rings = np.zeros(p.sizes.size, dtype=bool)
        rings[k - 1] = True
        x = p.refit(rings)
        if p.residual(x) <= EXACT_RING_TOL * p.cnorm:
            return x
    return None


def _fista_stage(p: _Problem, x0, mu, L, budget, rtol):
    """Monotone FISTA on one penalty level; returns the iterate and steps used."""
    x = x0
    y = x0
    t = 1.0
    fx = p.objective(x, mu)
    for it in range(1, budget + 1):
        z = group_soft_threshold(y - (p.AH @ (p.A @ y - p.c)) / L, mu / L, p.starts, p.sizes)
        fz = p.objective(z, mu)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        if fz <= fx:
            x_next, fx_next = z, fz
        else:
            x_next, fx_next = x, fx
        # prox-gradient step length; zero exactly at a minimizer
        step = np.linalg.norm(z - y)
        y = x_next + (t / t_next) * (z - x_next) + ((t - 1.0) / t_next) * (x_next - x)
        x, fx, t = x_next, fx_next, t_next
        if step <= rtol * max(np.linalg.norm(z), 1e-300):
            return x, it
    return x, budget


def solve(problem: SynthesisProblem, config: SolverConfig | None = None) -> Decomposition:
    """Compute coefficients ``x`` with small l1(l2) norm and ``A x ~ c(f)``.

    Parameters
    ----------
    problem : SynthesisProblem
        Target, grid and Taylor truncation.
    config : SolverConfig, optional
        Penalty schedule and stopping rule.

    Returns
    -------
    Decomposition
        The refit coefficients of the first continuation stage whose relative
        residual is at most ``config.tol``. If no stage reaches it, the best
        refit seen is returned with ``status == "nonconvergence"`` and a
        :class:`NonConvergence` warning is issued. A zero target gives zero
        coefficients with ``status == "degenerate"``.

    Raises
    ------
    IllConditioned
        If the Lipschitz constant cannot be estimated.
    """
    config = config or SolverConfig()
    p = _Problem(problem)
    n = p.A.shape[1]
    K = problem.grid.K

    if p.cnorm == 0.0:
        x = MixedCoefficients.zeros(K)
        return _finish(p, problem, x, 0, "degenerate", [], [], 0.0)

    exact = _exact_single_ring(p)
    if exact is not None:
        log.debug("target reproduced by a single ring")
        return _finish(p, problem, MixedCoefficients(exact, K), 0, "converged", [], [], 0.0)

    L = lipschitz_constant(p.A, config.power_rtol, config.power_max_iter) * (1.0 + 10 * config.power_rtol)
    if config.mu is not None:
        mu = float(config.mu)
    else:
        mu = config.mu0_factor * float(np.max(_block_norms(p.AH @ p.c, p.starts)))

    x = np.zeros(n, dtype=np.complex128)
    best, best_res = x, p.residual(x)
    objective_trace, stage_residuals = [], []
    used = 0
    status = "nonconvergence"
    for stage in range(config.continuation_steps):
        budget = config.max_iter - used
        if budget <= 0:
            break
        x, steps = _fista_stage(p, x, mu, L, budget, config.stage_rtol)
        used += steps
        objective_trace.append(p.objective(x, mu))
        stage_residuals.append(p.residual(x) / p.cnorm)

        active = _block_norms(x, p.starts) > 0
        xr = p.refit(active)
        res = p.residual(xr)
        log.debug("stage %d mu=%.3e active=%d refit residual=%.3e", stage, mu, active.sum(), res / p.cnorm)
        if res < best_res:
            best, best_res = xr, res
        if res <= config.tol * p.cnorm:
            status = "converged"
            break
        mu *= 0.5

    if status != "converged":
        warnings.warn(
            f"relative residual {best_res / p.cnorm:.3e} above tol {config.tol:g} "
            f"after {used} iterations",
            NonConvergence,
            stacklevel=2,
        )
    return _finish(p, problem, MixedCoefficients(best, K), used, status,
                   objective_trace, stage_residuals, mu)


def _finish(p, problem, x, iterations, status, objective_trace, stage_residuals, mu):
    sums = ring_partial_sums(x, problem.grid, problem.M)
    prefix = [float(np.linalg.norm(s - p.c)) for s in sums]
    return Decomposition(
        x=x,
        residual_rel=prefix[-1] / p.cnorm if p.cnorm else 0.0,
        mixed_norm=norm_1_2(x),
        iterations=iterations,
        partial_sum_sup=float(max(np.linalg.norm(s) for s in sums)),
        status=status,
        prefix_residuals=prefix,
        objective_trace=objective_trace,
        stage_residuals=stage_residuals,
        mu_final=mu,
    )


@dataclass(frozen=True)
class DecompositionReport:
    prefix_residuals: tuple
    residual: float
    residual_rel: float
    partial_sum_sup: float
    synthesis_norm: float
    synthesis_bound: float
    tail: float
    last_active_ring: int
    bound_ok: bool
    monotone_after_last_active: bool

    @property
    def ok(self) -> bool:
        return self.bound_ok and self.monotone_after_last_active


def verify_decomposition(d: Decomposition, problem: SynthesisProblem) -> DecompositionReport:
    """Recompute the representation ring by ring and check the synthesis bound.

    Prefix residuals are absolute H^2 distances ``||f - S_kappa||``.
    """
    c = problem.target_vector()
    sums = ring_partial_sums(d.x, problem.grid, problem.M)
    prefix = tuple(float(np.linalg.norm(s - c)) for s in sums)
    norms = [float(np.linalg.norm(s)) for s in sums]
    active = np.flatnonzero(d.x.block_norms() > 0)
    last = int(active[-1]) + 1 if active.size else 0
    tail_part = prefix[max(last - 1, 0):]
    monotone = all(b <= a for a, b in zip(tail_part, tail_part[1:]))
    tail = synthesis_tail(d.x, problem.grid, problem.M)
    bound = FRAME_UPPER * norm_1_2(d.x) + tail
    fnorm = h2_norm(problem.target)
    return DecompositionReport(
        prefix_residuals=prefix,
        residual=prefix[-1],
        residual_rel=prefix[-1] / fnorm if fnorm else 0.0,
        partial_sum_sup=max(norms),
        synthesis_norm=norms[-1],
        synthesis_bound=bound,
        tail=tail,
        last_active_ring=last,
        bound_ok=norms[-1] <= bound * (1.0 + 1e-12) + 1e-12,
        monotone_after_last_active=monotone,
    )
