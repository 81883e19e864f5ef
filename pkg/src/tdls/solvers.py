"""Single-frequency solvers for the collocated Lippmann-Schwinger equation."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import LinearOperator, gmres

from .grid import GridFunction, GridMismatchError, make_grid
from .operator import (
    DENSE_LIMIT,
    FrequencyOperator,
    SizeGuardError,
    assemble_dense,
    make_operator,
)

METHODS = ("gmres", "two_grid", "dense")


class SingularOperatorError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    method: str = "gmres"
    tol: float = 1e-10
    max_iter: int = 400
    restart: int = 50
    coarse_N: int | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if not 0 < self.tol <= 1e-2:
            raise ValueError(f"tol must lie in (0, 1e-2], got {self.tol}")
        if self.max_iter < 1 or self.restart < 1:
            raise ValueError("max_iter and restart must be positive")
        if self.coarse_N is not None and (self.coarse_N < 2 or self.coarse_N % 2):
            raise ValueError(f"coarse_N must be even, got {self.coarse_N}")

    def coarse_size(self, N: int) -> int:
        """Coarse grid size: the configured value or N/4 (at least 4, at most N/2).

        Grids with N <= 4 have no admissible coarse level; the coarse
        problem is then the fine problem itself.
        """
        if self.coarse_N is not None:
            if self.coarse_N > N // 2:
                raise ValueError(f"coarse_N={self.coarse_N} exceeds N/2 for N={N}")
            return self.coarse_N
        if N <= 4:
            return N
        nc = max(4, (N // 4) // 2 * 2)
        return min(nc, N // 2)


@dataclass(frozen=True)
class SolveReport:
    iterations: int
    final_residual: float
    converged: bool
    wall_time: float
    method: str = "gmres"
    target: float = 0.0


def _residual(op: FrequencyOperator, u: np.ndarray, rhs: np.ndarray) -> float:
    return float(np.linalg.norm((rhs - op.apply_array(u)).ravel()))


def _target(cfg: SolverConfig, rhs_norm: float, r0_norm: float) -> float:
    # a zero right-hand side is measured against the initial residual
    return cfg.tol * (rhs_norm if rhs_norm > 0 else r0_norm)


def solve_frequency(op: FrequencyOperator, rhs: GridFunction, cfg: SolverConfig | None = None,
                    x0: GridFunction | None = None):
    """Solve ``A u = rhs``; returns ``(u, SolveReport)``.

    Non-convergence is reported through ``SolveReport.converged`` and the
    best iterate is returned.
    """
    cfg = cfg or SolverConfig()
    if rhs.grid != op.grid:
        raise GridMismatchError("right-hand side lives on a different grid")
    if cfg.method == "two_grid":
        return two_grid_solve(op, rhs, cfg, x0=x0)
    if cfg.method == "dense":
        t0 = time.perf_counter()
        u = solve_dense_oracle(op, rhs)
        res = _residual(op, u.values, rhs.values)
        return u, SolveReport(1, res, True, time.perf_counter() - t0, "dense", res)
    return _gmres_solve(op, rhs, cfg, x0)


def _gmres_solve(op, rhs, cfg, x0):
    t0 = time.perf_counter()
    shape = op.grid.shape
    n = op.grid.size
    b = rhs.nodal().values.ravel()
    x = np.zeros(n, dtype=complex) if x0 is None else x0.nodal().values.ravel().copy()
    bnorm = float(np.linalg.norm(b))
    r0 = _residual(op, x.reshape(shape), b.reshape(shape))
    target = _target(cfg, bnorm, r0)
    if r0 <= target:
        return (GridFunction(op.grid, x.reshape(shape)),
                SolveReport(0, r0, True, time.perf_counter() - t0, "gmres", target))

    A = LinearOperator((n, n), matvec=lambda v: op.apply_array(v.reshape(shape)).ravel(),
                       dtype=complex)
    count = [0]

    def callback(_):
        count[0] += 1

    res = r0
    # scipy's stopping test uses the recurrence residual; re-check the true one
    while count[0] < cfg.max_iter:
        remaining = cfg.max_iter - count[0]
        restart = min(cfg.restart, n, remaining)
        x, _ = gmres(A, b, x0=x, rtol=0.0, atol=0.5 * target, restart=restart,
                     maxiter=max(1, math.ceil(remaining / restart)),
                     callback=callback, callback_type="pr_norm")
        res = _residual(op, x.reshape(shape), b.reshape(shape))
        if res <= target:
            break
    converged = res <= target
    return (GridFunction(op.grid, x.reshape(shape)),
            SolveReport(count[0], res, converged, time.perf_counter() - t0, "gmres", target))


def _restrict_fourier(coeffs: np.ndarray, fine, coarse) -> np.ndarray:
    """Truncate unitary DFT coefficients to the coarse index set."""
    keep = np.ix_(*([_coarse_positions(fine.N, coarse.N)] * fine.d))
    return coeffs[keep] * math.sqrt(coarse.size / fine.size)


def _prolong_fourier(coeffs: np.ndarray, coarse, fine) -> np.ndarray:
    """Zero-pad coarse coefficients onto the fine index set."""
    out = np.zeros(fine.shape, dtype=complex)
    out[np.ix_(*([_coarse_positions(fine.N, coarse.N)] * fine.d))] = (
        coeffs * math.sqrt(fine.size / coarse.size))
    return out


def _coarse_positions(N: int, Nc: int) -> np.ndarray:
    """Fine wrap-around positions of the coarse indices, in coarse order."""
    k = np.fft.fftfreq(Nc, d=1.0 / Nc).astype(int)
    return np.where(k >= 0, k, N + k)


class _CoarseSolver:
    def __init__(self, op: FrequencyOperator, Nc: int, cfg: SolverConfig):
        grid = op.grid
        self.fine = grid
        self.coarse = make_grid(grid.d, Nc, grid.rho)
        self.op = (op if Nc == grid.N else
                   make_operator(self.coarse, op.s, op.q.restrict(self.coarse), op.c0))
        self.cfg = cfg
        self.lu = None
        if self.coarse.size <= DENSE_LIMIT:
            mat = assemble_dense(self.op)
            self.lu = scipy.linalg.lu_factor(mat, check_finite=False)
            if np.min(np.abs(np.diag(self.lu[0]))) < 1e-14 * np.max(np.abs(mat)):
                raise SingularOperatorError("coarse-grid matrix is numerically singular")

    def solve(self, fine_coeffs: np.ndarray) -> np.ndarray:
        """A_c^{-1} applied to a fine-grid residual given by its coefficients."""
        cc = _restrict_fourier(fine_coeffs, self.fine, self.coarse)
        axes = tuple(range(-self.coarse.d, 0))
        rc = np.fft.ifftn(cc, axes=axes, norm="ortho")
        if self.lu is not None:
            ec = scipy.linalg.lu_solve(self.lu, rc.ravel(), check_finite=False)
            ec = ec.reshape(self.coarse.shape)
        else:
            sub = SolverConfig("gmres", tol=min(self.cfg.tol, 1e-12),
                               max_iter=self.cfg.max_iter, restart=self.cfg.restart)
            ec = _gmres_solve(self.op, GridFunction(self.coarse, rc), sub, None)[0].values
        ec_coeffs = np.fft.fftn(ec, axes=axes, norm="ortho")
        return _prolong_fourier(ec_coeffs, self.coarse, self.fine)


def two_grid_solve(op: FrequencyOperator, rhs: GridFunction, cfg: SolverConfig | None = None,
                   x0: GridFunction | None = None):
    """Two-grid iteration for the second-kind equation ``(I + K) u = rhs``.

    Each sweep computes the residual ``r`` and applies the approximate inverse
    ``B = I - P A_c^{-1} R K``: ``u <- u + r - P A_c^{-1} R (K r)``, with
    ``R``/``P`` Fourier truncation and zero padding and ``A_c`` the operator
    collocated on the coarse grid.  The extra application of ``K`` damps
    the high modes that a bare coarse-grid correction never touches.
    """
    cfg = cfg or SolverConfig(method="two_grid")
    if rhs.grid != op.grid:
        raise GridMismatchError("right-hand side lives on a different grid")
    t0 = time.perf_counter()
    grid = op.grid
    axes = tuple(range(-grid.d, 0))
    b = rhs.nodal().values
    u = np.zeros(grid.shape, dtype=complex) if x0 is None else x0.nodal().values.copy()
    try:
        coarse = _CoarseSolver(op, cfg.coarse_size(grid.N), cfg)
    except SingularOperatorError:
        res = _residual(op, u, b)
        return (GridFunction(grid, u),
                SolveReport(0, res, False, time.perf_counter() - t0, "two_grid", 0.0))

    r = b - op.apply_array(u)
    res = float(np.linalg.norm(r.ravel()))
    target = _target(cfg, float(np.linalg.norm(b.ravel())), res)
    it = 0
    while res > target and it < cfg.max_iter:
        kr = op.apply_compact(r)
        corr = coarse.solve(np.fft.fftn(kr, axes=axes, norm="ortho"))
        u = u + r - np.fft.ifftn(corr, axes=axes, norm="ortho")
        it += 1
        r = b - op.apply_array(u)
        new_res = float(np.linalg.norm(r.ravel()))
        if not np.isfinite(new_res):
            break
        res = new_res
    return (GridFunction(grid, u),
            SolveReport(it, res, res <= target, time.perf_counter() - t0, "two_grid", target))


def solve_dense_oracle(op: FrequencyOperator, rhs: GridFunction) -> GridFunction:
    """Direct LU solve of the assembled matrix (small grids only)."""
    if op.grid.size > DENSE_LIMIT:
        raise SizeGuardError(f"dense solve limited to {DENSE_LIMIT} unknowns")
    if rhs.grid != op.grid:
        raise GridMismatchError("right-hand side lives on a different grid")
    mat = assemble_dense(op)
    lu, piv = scipy.linalg.lu_factor(mat, check_finite=False)
    if np.min(np.abs(np.diag(lu))) < 1e-14 * np.max(np.abs(mat)):
        raise SingularOperatorError("Lippmann-Schwinger matrix is numerically singular")
    x = scipy.linalg.lu_solve((lu, piv), rhs.nodal().values.ravel(), check_finite=False)
    return GridFunction(op.grid, x.reshape(op.grid.shape))
