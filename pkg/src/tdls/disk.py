"""Separation-of-variables reference for a homogeneous disk at complex frequency.

Incident field ``exp(-kappa0 x1)`` with ``kappa0 = s/c0``.  Outside the disk
the scattered field is ``sum_n a_n K_n(kappa0 r) e^{in theta}``; inside the
total field is ``sum_n b_n I_n(kappa1 r) e^{in theta}`` with
``kappa1 = kappa0 sqrt(1 + q)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernel import ComplexFrequency, as_frequency
from .special import bessel_i, bessel_i_prime, bessel_k, bessel_k_prime


class DiskSystemError(RuntimeError):
    pass


@dataclass(frozen=True)
class DiskConfig:
    radius: float
    q: float
    s: ComplexFrequency
    c0: float = 1.0
    n_max: int = 40

    def __post_init__(self):
        object.__setattr__(self, "s", as_frequency(self.s))
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if not 1 + self.q > 0:
            raise ValueError("contrast must satisfy 1 + q > 0")
        if not self.c0 > 0:
            raise ValueError("c0 must be positive")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")

    @property
    def kappa0(self) -> complex:
        return self.s.s / self.c0

    @property
    def kappa1(self) -> complex:
        return self.kappa0 * np.sqrt(1.0 + self.q)


def _continuity_system(cfg: DiskConfig, n: np.ndarray):
    """2x2 systems [[I_n(k1 R), -K_n(k0 R)], [k1 I_n', -k0 K_n']] per order."""
    R = cfg.radius
    k0, k1 = cfg.kappa0, cfg.kappa1
    z0, z1 = k0 * R, k1 * R
    sign = (-1.0) ** np.abs(n)
    mat = np.empty((n.size, 2, 2), dtype=complex)
    mat[:, 0, 0] = bessel_i(n, z1)
    mat[:, 0, 1] = -bessel_k(n, z0)
    mat[:, 1, 0] = k1 * bessel_i_prime(n, z1)
    mat[:, 1, 1] = -k0 * bessel_k_prime(n, z0)
    rhs = np.stack([sign * bessel_i(n, z0), sign * k0 * bessel_i_prime(n, z0)], axis=-1)
    return mat, rhs


def disk_series_coeffs(cfg: DiskConfig):
    """Orders ``n`` and coefficient arrays ``(a_n, b_n)``.

    Orders run over ``-n_max..n_max``, trimmed symmetrically where ``I_n``
    underflows or ``K_n`` overflows at the boundary; such terms are far
    below double precision relative to the retained ones.
    """
    n = np.arange(-cfg.n_max, cfg.n_max + 1)
    with np.errstate(over="ignore", invalid="ignore"):
        mat, rhs = _continuity_system(cfg, n)
    ok = (np.all(np.isfinite(mat), axis=(1, 2)) & np.all(np.isfinite(rhs), axis=1)
          & (mat[:, 0, 0] != 0) & (rhs[:, 0] != 0))
    nmax = int(np.abs(n[ok]).max()) if ok[cfg.n_max] else -1
    keep = np.abs(n) <= nmax
    if nmax < 0 or not np.all(ok[keep]):
        raise DiskSystemError("Bessel values out of range at low order")
    n, mat, rhs = n[keep], mat[keep], rhs[keep]
    det = mat[:, 0, 0] * mat[:, 1, 1] - mat[:, 0, 1] * mat[:, 1, 0]
    size = np.abs(mat[:, 0, 0] * mat[:, 1, 1]) + np.abs(mat[:, 0, 1] * mat[:, 1, 0])
    if np.any(np.abs(det) <= 1e-13 * size):
        raise DiskSystemError("continuity system is singular")
    sol = np.linalg.solve(mat, rhs[..., None])[..., 0]
    return n, sol[:, 1], sol[:, 0]


def continuity_residual(cfg: DiskConfig) -> float:
    """Max relative residual of the 2x2 continuity solves."""
    n, a, b = disk_series_coeffs(cfg)
    mat, rhs = _continuity_system(cfg, n)
    res = np.einsum("nij,nj->ni", mat, np.stack([b, a], axis=-1)) - rhs
    ref = np.abs(mat).max(axis=(1, 2)) * np.maximum(np.abs(a), np.abs(b)) + np.abs(rhs).max(axis=1)
    return float(np.max(np.abs(res).max(axis=1) / np.where(ref > 0, ref, 1.0)))


def disk_series_field(cfg: DiskConfig, x, y=None, total: bool = False):
    """Scattered field at points ``(x, y)``; ``total=True`` adds the incident wave.

    ``x`` may also be an array of shape (..., 2) when ``y`` is omitted.
    """
    if y is None:
        pts = np.asarray(x, dtype=float)
        x, y = pts[..., 0], pts[..., 1]
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = np.hypot(x, y)
    theta = np.arctan2(y, x)
    n, a, b = disk_series_coeffs(cfg)
    k0, k1 = cfg.kappa0, cfg.kappa1
    inside = r < cfg.radius
    incident = np.exp(-k0 * x)

    out = np.zeros(r.shape, dtype=complex)
    phase = np.exp(1j * np.multiply.outer(theta, n))
    if np.any(inside):
        ri = r[inside]
        interior = (bessel_i(n, (k1 * ri)[:, None]) * phase[inside]) @ b
        out[inside] = interior - incident[inside]
    if np.any(~inside):
        ro = r[~inside]
        out[~inside] = (bessel_k(n, (k0 * ro)[:, None]) * phase[~inside]) @ a
    return out + incident if total else out


def disk_series_radial_derivative(cfg: DiskConfig, theta, side: str):
    """d/dr of the total field at r = radius from inside or outside."""
    theta = np.asarray(theta, dtype=float)
    n, a, b = disk_series_coeffs(cfg)
    k0, k1 = cfg.kappa0, cfg.kappa1
    R = cfg.radius
    phase = np.exp(1j * np.multiply.outer(theta, n))
    if side == "inside":
        return phase @ (b * k1 * bessel_i_prime(n, k1 * R))
    sign = (-1.0) ** np.abs(n)
    return phase @ (a * k0 * bessel_k_prime(n, k0 * R) + sign * k0 * bessel_i_prime(n, k0 * R))


def disk_series_total_on_boundary(cfg: DiskConfig, theta, side: str):
    theta = np.asarray(theta, dtype=float)
    n, a, b = disk_series_coeffs(cfg)
    R = cfg.radius
    phase = np.exp(1j * np.multiply.outer(theta, n))
    if side == "inside":
        return phase @ (b * bessel_i(n, cfg.kappa1 * R))
    sign = (-1.0) ** np.abs(n)
    return phase @ (a * bessel_k(n, cfg.kappa0 * R) + sign * bessel_i(n, cfg.kappa0 * R))


def tail_estimate(cfg: DiskConfig) -> float:
    """Magnitude of the outermost retained terms, a proxy for truncation error."""
    n, a, b = disk_series_coeffs(cfg)
    R = cfg.radius
    ends = [0, -1]
    return float(max(np.max(np.abs(a[ends] * bessel_k(n[ends], cfg.kappa0 * R))),
                     np.max(np.abs(b[ends] * bessel_i(n[ends], cfg.kappa1 * R)))))
