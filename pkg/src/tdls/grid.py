"""Periodic trigonometric collocation grids on the cell (-2*rho, 2*rho]^d.

Arrays indexed by Z^d_N are stored in the usual wrap-around DFT order: array
position ``p`` along an axis holds integer index ``p`` for ``p < N/2`` and
``p - N`` otherwise.  With that layout ``numpy.fft`` acts directly on the
monomials ``exp(i*pi*j.x/(2*rho))`` sampled at the nodes ``x_k = k*h``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

NODAL = "nodal"
FOURIER = "fourier"


class GridMismatchError(ValueError):
    """Raised when two objects that must share a grid do not."""


@dataclass(frozen=True)
class TrigGrid:
    d: int
    N: int
    rho: float

    def __post_init__(self):
        if self.d not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {self.d}")
        if int(self.N) != self.N or self.N < 2 or self.N % 2:
            raise ValueError(f"N must be an even integer >= 2, got {self.N}")
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "rho", float(self.rho))

    @property
    def h(self) -> float:
        return 4.0 * self.rho / self.N

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.d

    @property
    def size(self) -> int:
        return self.N**self.d

    @property
    def cell_volume(self) -> float:
        return self.h**self.d

    def indices_1d(self) -> np.ndarray:
        """Integer indices of one axis in wrap-around order."""
        return np.fft.fftfreq(self.N, d=1.0 / self.N).astype(int)

    def index_arrays(self) -> tuple[np.ndarray, ...]:
        """Broadcast integer index arrays j_1, ..., j_d over Z^d_N."""
        k = self.indices_1d()
        return tuple(np.meshgrid(*([k] * self.d), indexing="ij"))

    def index_norm_sq(self) -> np.ndarray:
        """|j|^2 over Z^d_N."""
        return sum(kk.astype(float) ** 2 for kk in self.index_arrays())

    def coordinates(self) -> tuple[np.ndarray, ...]:
        """Node coordinates x_k = k*h, one array per axis."""
        return tuple(kk * self.h for kk in self.index_arrays())

    def radius(self) -> np.ndarray:
        return np.sqrt(sum(x**2 for x in self.coordinates()))

    def to_centered(self, arr: np.ndarray) -> np.ndarray:
        """Reorder a wrap-around array into increasing index order."""
        return np.fft.fftshift(arr, axes=tuple(range(-self.d, 0)))

    def from_centered(self, arr: np.ndarray) -> np.ndarray:
        return np.fft.ifftshift(arr, axes=tuple(range(-self.d, 0)))

    def check_values(self, values: np.ndarray) -> None:
        if values.shape[-self.d:] != self.shape:
            raise GridMismatchError(
                f"array shape {values.shape} does not match grid {self.shape}"
            )


def make_grid(d: int, N: int, rho: float) -> TrigGrid:
    return TrigGrid(d=d, N=N, rho=rho)


@dataclass(frozen=True)
class GridFunction:
    """Complex field on a grid, either as nodal values or Fourier coefficients.

    Fourier coefficients use the unitary DFT, so the Euclidean norm of the
    coefficient vector equals the Euclidean norm of the nodal vector.
    """

    grid: TrigGrid
    values: np.ndarray
    repr: str = NODAL

    def __post_init__(self):
        if self.repr not in (NODAL, FOURIER):
            raise ValueError(f"unknown representation {self.repr!r}")
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != self.grid.shape:
            raise GridMismatchError(
                f"values of shape {vals.shape} on grid of shape {self.grid.shape}"
            )
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def nodal(self) -> GridFunction:
        return self if self.repr == NODAL else fourier_to_nodal(self)

    def fourier(self) -> GridFunction:
        return self if self.repr == FOURIER else nodal_to_fourier(self)

    def norm(self) -> float:
        """Discrete l2 norm; the same in both representations."""
        return float(np.linalg.norm(self.values.ravel()))

    def __add__(self, other: GridFunction) -> GridFunction:
        _same_grid(self.grid, other.grid)
        return GridFunction(self.grid, self.nodal().values + other.nodal().values)

    def __sub__(self, other: GridFunction) -> GridFunction:
        _same_grid(self.grid, other.grid)
        return GridFunction(self.grid, self.nodal().values - other.nodal().values)

    def __mul__(self, alpha: complex) -> GridFunction:
        return GridFunction(self.grid, alpha * self.values, self.repr)

    __rmul__ = __mul__


def _same_grid(a: TrigGrid, b: TrigGrid) -> None:
    if a != b:
        raise GridMismatchError(f"grid mismatch: {a} vs {b}")


def _axes(grid: TrigGrid) -> tuple[int, ...]:
    return tuple(range(-grid.d, 0))


def nodal_to_fourier(f: GridFunction) -> GridFunction:
    if f.repr != NODAL:
        raise ValueError("expected a nodal GridFunction")
    coeffs = np.fft.fftn(f.values, axes=_axes(f.grid), norm="ortho")
    return GridFunction(f.grid, coeffs, FOURIER)


def fourier_to_nodal(f: GridFunction) -> GridFunction:
    if f.repr != FOURIER:
        raise ValueError("expected a Fourier GridFunction")
    vals = np.fft.ifftn(f.values, axes=_axes(f.grid), norm="ortho")
    return GridFunction(f.grid, vals, NODAL)


def monomial(grid: TrigGrid, j) -> GridFunction:
    """Nodal samples of exp(i*pi*j.x/(2*rho))."""
    phase = sum(jk * xk for jk, xk in zip(j, grid.coordinates()))
    return GridFunction(grid, np.exp(1j * np.pi * phase / (2 * grid.rho)))


def interp_project(g: Callable, grid: TrigGrid) -> GridFunction:
    """Interpolation projection Q_N: sample ``g(*coords)`` at the nodes.

    The trigonometric polynomial determined by those samples is the
    interpolant; no further work is needed in nodal form.
    """
    vals = np.broadcast_to(np.asarray(g(*grid.coordinates()), dtype=complex), grid.shape)
    return GridFunction(grid, vals)


def evaluate_trig_poly(f: GridFunction, points: np.ndarray) -> np.ndarray:
    """Evaluate the trigonometric interpolant of ``f`` at arbitrary points.

    ``points`` has shape (..., d).  Direct summation, for tests and
    diagnostics on small grids.
    """
    grid = f.grid
    coeffs = f.fourier().values.ravel()
    jj = np.stack([kk.ravel() for kk in grid.index_arrays()], axis=-1)
    pts = np.asarray(points, dtype=float)
    phase = np.exp(1j * np.pi / (2 * grid.rho) * (pts @ jj.T))
    return phase @ coeffs / np.sqrt(grid.size)


@dataclass(frozen=True)
class ContrastField:
    grid: TrigGrid
    values: np.ndarray
    sup_abs: float = field(init=False)
    support: np.ndarray = field(init=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        self.grid.check_values(vals)
        if vals.shape != self.grid.shape:
            raise GridMismatchError("contrast must be a single real field on the grid")
        if not np.all(np.isfinite(vals)):
            raise ValueError("contrast values must be finite")
        vals = vals.copy()
        vals.flags.writeable = False
        support = vals != 0
        support.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "sup_abs", float(np.max(np.abs(vals))) if vals.size else 0.0)

    def support_radius(self) -> float:
        """Largest |x| over supported nodes (0 for a vanishing contrast)."""
        r = self.grid.radius()[self.support]
        return float(r.max()) if r.size else 0.0

    def support_in_ball(self, slack: float = 0.0) -> bool:
        """True when every supported node satisfies |x| <= rho + slack."""
        return self.support_radius() <= (self.grid.rho + slack) * (1 + 1e-12)

    def restrict(self, coarse: TrigGrid) -> ContrastField:
        """Sample at the nodes of a nested coarser grid."""
        return ContrastField(coarse, restrict_nodal(self.values, self.grid, coarse))


def disk_contrast(grid: TrigGrid, radius: float, q: float, sampling: str = "cell",
                  subsamples: int | None = None) -> ContrastField:
    """Constant contrast ``q`` on the disk/ball |x| < radius.

    ``sampling="point"`` takes ``q`` at nodes strictly inside.  ``"cell"``
    (default) weights each node by the fraction of its cell ``x_k + h*[-1/2, 1/2]^d``
    covered by the disk, estimated by midpoint subsampling of the cells that
    straddle the boundary.  Cell sampling lets the support reach half a cell
    diagonal beyond ``radius``.
    """
    r = grid.radius()
    if sampling == "point":
        return ContrastField(grid, np.where(r < radius, q, 0.0))
    if sampling != "cell":
        raise ValueError(f"sampling must be 'point' or 'cell', got {sampling!r}")
    h = grid.h
    half_diag = 0.5 * h * np.sqrt(grid.d)
    frac = (r < radius).astype(float)
    straddle = np.abs(r - radius) <= half_diag * (1 + 1e-12)
    if np.any(straddle):
        sub = subsamples or (32 if grid.d == 2 else 12)
        off = ((np.arange(sub) + 0.5) / sub - 0.5) * h
        offsets = np.stack(np.meshgrid(*([off] * grid.d), indexing="ij"), -1).reshape(-1, grid.d)
        centres = np.stack([x[straddle] for x in grid.coordinates()], -1)
        pts = centres[:, None, :] + offsets[None, :, :]
        frac[straddle] = np.mean(np.linalg.norm(pts, axis=-1) < radius, axis=1)
    return ContrastField(grid, q * frac)


def mollified_disk_contrast(
    grid: TrigGrid, radius: float, q: float, ramp_width: float
) -> ContrastField:
    """Radial C^2 ramp from ``q`` (|x| <= radius - width) to 0 (|x| >= radius)."""
    if not 0 < ramp_width <= radius:
        raise ValueError("ramp_width must lie in (0, radius]")
    t = np.clip((radius - grid.radius()) / ramp_width, 0.0, 1.0)
    # quintic smoothstep: C^2 at both ends
    smooth = t**3 * (10 - 15 * t + 6 * t**2)
    return ContrastField(grid, q * smooth)


def restrict_nodal(values: np.ndarray, fine: TrigGrid, coarse: TrigGrid) -> np.ndarray:
    """Pick the fine-grid values at the coarse nodes (coarse nodes are a subset)."""
    if fine.d != coarse.d or fine.rho != coarse.rho or fine.N % coarse.N:
        raise GridMismatchError("coarse grid is not nested in the fine grid")
    stride = fine.N // coarse.N
    sl = (slice(None, None, stride),) * fine.d
    return np.asarray(values)[(...,) + sl]


def weighted_l2_norm(f: GridFunction, q: ContrastField) -> float:
    """(h^d * sum_j |q(x_j)| |f(x_j)|^2)^(1/2)."""
    _same_grid(f.grid, q.grid)
    vals = f.nodal().values
    return float(np.sqrt(f.grid.cell_volume * np.sum(np.abs(q.values) * np.abs(vals) ** 2)))


def sobolev_norm(f: GridFunction, t: float) -> float:
    """Discrete H^t norm over the represented modes."""
    coeffs = f.fourier().values
    weight = (1.0 + f.grid.index_norm_sq()) ** t
    return float(np.sqrt(np.sum(weight * np.abs(coeffs) ** 2)))
