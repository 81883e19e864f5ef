"""Fourier coefficients of the truncated, periodized Laplace-domain kernel.

The coefficient of monomial ``j`` is the literal integral

    kappa(j) = int_{|z| < 2 rho} G_s(z) exp(-i pi j.z / (2 rho)) dz,

where ``G_s`` is the fundamental solution of ``-Lap + (s/c0)^2``:
``exp(-s r/c0) / (4 pi r)`` in 3D and ``K_0(s r/c0) / (2 pi)`` in 2D.  With this
convention the periodized volume potential is pure multiplication by
``kappa(j)`` on the unitary DFT coefficients.  Both dimensions reduce to a
radial integral, which has a closed form and is also what the quadrature
oracle integrates.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .grid import TrigGrid
from .special import DomainError, bessel_complex


class ConvergenceError(RuntimeError):
    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


@dataclass(frozen=True)
class ComplexFrequency:
    s: complex

    def __post_init__(self):
        s = complex(self.s)
        if not np.isfinite(s) or s.real <= 0:
            raise DomainError(f"Laplace parameter needs Re(s) > 0, got {s}")
        object.__setattr__(self, "s", s)

    @property
    def sigma(self) -> float:
        return self.s.real

    @property
    def omega(self) -> float:
        return self.s.imag

    def conjugate(self) -> ComplexFrequency:
        return ComplexFrequency(self.s.conjugate())

    def __complex__(self):
        return self.s


def as_frequency(s) -> ComplexFrequency:
    return s if isinstance(s, ComplexFrequency) else ComplexFrequency(s)


def _check_lengths(rho, c0):
    if not rho > 0 or not c0 > 0:
        raise ValueError("rho and c0 must be positive")


def _radial_3d(jnorm, s, rho, c0):
    a = 2.0 * rho
    b = np.pi * jnorm / a
    c = s / c0
    ac = a * c
    # (c/b) sin(ab) written through sinc so that j = 0 needs no special case
    bracket = np.cos(np.pi * jnorm) + ac * np.sinc(jnorm)
    with np.errstate(under="ignore"):
        decay = np.exp(-ac)
    return (1.0 - decay * bracket) / (b**2 + c**2), b**2 + c**2, b


def _radial_2d(jnorm, s, rho, c0, j0=None, j1=None):
    a = 2.0 * rho
    b = np.pi * jnorm / a
    c = s / c0
    ac = a * c
    if j0 is None:
        j0 = bessel_complex(0, "J", np.pi * jnorm)
        j1 = bessel_complex(1, "J", np.pi * jnorm)
    k0 = bessel_complex(0, "K", ac)
    k1 = bessel_complex(1, "K", ac)
    num = 1.0 + a * (b * j1 * k0 - c * j0 * k1)
    return num / (b**2 + c**2), b**2 + c**2, b


def _guarded(value, denom, b, j, s, rho, c0, d):
    if abs(denom) < 1e-10 * max(b**2, 1e-300):
        return kernel_coeff_quadrature_oracle(j, s, rho, c0, tol=1e-12, d=d)
    return complex(value)


def kernel_coeff_3d(j, s, rho, c0=1.0) -> complex:
    """Closed-form kernel coefficient for a 3D index ``j``."""
    s = as_frequency(s).s
    _check_lengths(rho, c0)
    jnorm = float(np.linalg.norm(np.asarray(j, dtype=float)))
    val, denom, b = _radial_3d(jnorm, s, rho, c0)
    return _guarded(val, denom, b, j, s, rho, c0, 3)


def kernel_coeff_2d(j, s, rho, c0=1.0) -> complex:
    """Closed-form kernel coefficient for a 2D index ``j`` (K_0 kernel)."""
    s = as_frequency(s).s
    _check_lengths(rho, c0)
    jnorm = float(np.linalg.norm(np.asarray(j, dtype=float)))
    val, denom, b = _radial_2d(jnorm, s, rho, c0)
    return _guarded(val, denom, b, j, s, rho, c0, 2)


def kernel_coeff(j, s, rho, c0=1.0) -> complex:
    """Dispatch on the length of ``j``."""
    return (kernel_coeff_2d if len(j) == 2 else kernel_coeff_3d)(j, s, rho, c0)


def kernel_coeff_quadrature_oracle(j, s, rho, c0=1.0, tol=1e-10, d=None) -> complex:
    """Kernel coefficient by adaptive radial quadrature.

    Independent of the closed forms: integrates ``exp(-s r/c0) sinc(b r) r``
    (3D) or ``K_0(s r/c0) J_0(b r) r`` (2D) over ``0 < r < 2 rho`` with
    :func:`scipy.integrate.quad`, real and imaginary parts separately.
    """
    if not 1e-12 <= tol <= 1e-4:
        raise ValueError("tol must lie in [1e-12, 1e-4]")
    s = as_frequency(s).s
    _check_lengths(rho, c0)
    d = len(j) if d is None else d
    jnorm = float(np.linalg.norm(np.asarray(j, dtype=float)))
    a = 2.0 * rho
    b = np.pi * jnorm / a
    c = s / c0

    if d == 3:
        def f(r):
            return np.exp(-c * r) * np.sinc(b * r / np.pi) * r
    elif d == 2:
        def f(r):
            return special.kv(0, c * r) * special.j0(b * r) * r if r > 0 else 0.0
    else:
        raise ValueError("d must be 2 or 3")

    # enough subintervals to resolve the oscillation of J_0 / sinc
    limit = 200 + int(4 * jnorm)
    parts = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for part in (lambda r: f(r).real, lambda r: f(r).imag):
            val, err = integrate.quad(part, 0.0, a, epsabs=0.0, epsrel=tol / 4,
                                      limit=limit)
            parts.append((val, err))
    result = complex(parts[0][0], parts[1][0])
    err = float(np.hypot(parts[0][1], parts[1][1]))
    if err > tol * abs(result):
        raise ConvergenceError(
            f"radial quadrature did not reach tol={tol:g} (estimate {err:.3e})",
            estimate=err,
        )
    return result


@lru_cache(maxsize=32)
def _index_data(grid: TrigGrid):
    jnorm = np.sqrt(grid.index_norm_sq())
    if grid.d == 2:
        return jnorm, special.j0(np.pi * jnorm), special.j1(np.pi * jnorm)
    return jnorm, None, None


@dataclass(frozen=True)
class KernelTable:
    grid: TrigGrid
    s: ComplexFrequency
    c0: float
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.grid.check_values(self.coeffs)
        self.coeffs.flags.writeable = False


def build_kernel_table(grid: TrigGrid, s, c0=1.0) -> KernelTable:
    """Kernel coefficients over Z^d_N, in the grid's wrap-around layout."""
    freq = as_frequency(s)
    _check_lengths(grid.rho, c0)
    jnorm, j0, j1 = _index_data(grid)
    if grid.d == 2:
        vals, denom, b = _radial_2d(jnorm, freq.s, grid.rho, c0, j0, j1)
    else:
        vals, denom, b = _radial_3d(jnorm, freq.s, grid.rho, c0)
    vals = np.asarray(vals, dtype=complex)
    bad = np.abs(denom) < 1e-10 * np.maximum(b**2, 1e-300)
    if np.any(bad):
        for idx in zip(*np.nonzero(bad)):
            j = [kk[idx] for kk in grid.index_arrays()]
            vals[idx] = kernel_coeff_quadrature_oracle(j, freq.s, grid.rho, c0,
                                                       tol=1e-12, d=grid.d)
    return KernelTable(grid, freq, float(c0), vals)


def write_kernel_csv(table: KernelTable, path, oracle_error=None) -> None:
    """CSV dump: integer indices, Re and Im of each coefficient."""
    grid = table.grid
    idx = [kk.ravel() for kk in grid.index_arrays()]
    vals = table.coeffs.ravel()
    names = [f"j{k + 1}" for k in range(grid.d)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        header = names + ["re_kappa", "im_kappa"]
        if oracle_error is not None:
            header.append("rel_err_vs_quadrature")
        w.writerow(header)
        for n in range(vals.size):
            row = [int(i[n]) for i in idx] + [repr(float(vals[n].real)), repr(float(vals[n].imag))]
            if oracle_error is not None:
                err = oracle_error.ravel()[n]
                row.append("" if np.isnan(err) else repr(float(err)))
            w.writerow(row)
