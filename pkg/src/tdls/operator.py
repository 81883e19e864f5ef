"""The collocated Lippmann-Schwinger operator I + (s/c0)^2 V_p Q_N(q .)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import ContrastField, GridFunction, GridMismatchError, TrigGrid
from .kernel import ComplexFrequency, KernelTable, as_frequency, build_kernel_table

DENSE_LIMIT = 4096


class SizeGuardError(ValueError):
    pass


def _axes(grid):
    return tuple(range(-grid.d, 0))


def _check_grid(expected: TrigGrid, got: TrigGrid, what: str) -> None:
    if expected != got:
        raise GridMismatchError(f"{what} lives on {got}, expected {expected}")


def apply_kernel_array(ktable: KernelTable, values: np.ndarray) -> np.ndarray:
    """V_p on raw nodal arrays; leading axes are treated as a batch."""
    axes = _axes(ktable.grid)
    coeffs = np.fft.fftn(values, axes=axes, norm="ortho")
    return np.fft.ifftn(ktable.coeffs * coeffs, axes=axes, norm="ortho")


def apply_volume_potential(ktable: KernelTable, f: GridFunction) -> GridFunction:
    _check_grid(ktable.grid, f.grid, "argument")
    return GridFunction(f.grid, apply_kernel_array(ktable, f.nodal().values))


@dataclass(frozen=True)
class FrequencyOperator:
    grid: TrigGrid
    s: ComplexFrequency
    c0: float
    q: ContrastField
    ktable: KernelTable

    def __post_init__(self):
        _check_grid(self.grid, self.q.grid, "contrast")
        kt = self.ktable
        if kt.grid != self.grid or kt.s != self.s or kt.c0 != self.c0:
            raise GridMismatchError("kernel table was built for a different (grid, s, c0)")

    @property
    def multiplier(self) -> complex:
        return (self.s.s / self.c0) ** 2

    def apply_array(self, u: np.ndarray) -> np.ndarray:
        """A u on raw nodal arrays (batch axes allowed)."""
        return u + self.multiplier * apply_kernel_array(self.ktable, self.q.values * u)

    def apply_compact(self, u: np.ndarray) -> np.ndarray:
        """K u = A u - u."""
        return self.multiplier * apply_kernel_array(self.ktable, self.q.values * u)


def make_operator(grid: TrigGrid, s, q: ContrastField, c0: float = 1.0) -> FrequencyOperator:
    freq = as_frequency(s)
    return FrequencyOperator(grid, freq, float(c0), q, build_kernel_table(grid, freq, c0))


def apply_ls_operator(op: FrequencyOperator, u: GridFunction) -> GridFunction:
    _check_grid(op.grid, u.grid, "argument")
    return GridFunction(u.grid, op.apply_array(u.nodal().values))


def rhs_from_incident(op: FrequencyOperator, ui: GridFunction) -> GridFunction:
    """-(s/c0)^2 V_p(q u_i); only values of ``ui`` on supp q matter."""
    _check_grid(op.grid, ui.grid, "incident field")
    vals = -op.multiplier * apply_kernel_array(op.ktable, op.q.values * ui.nodal().values)
    return GridFunction(op.grid, vals)


def assemble_dense(op: FrequencyOperator, chunk: int = 256) -> np.ndarray:
    """Matrix of the operator in the flattened nodal basis, column by column."""
    n = op.grid.size
    if n > DENSE_LIMIT:
        raise SizeGuardError(f"dense assembly limited to {DENSE_LIMIT} unknowns, got {n}")
    shape = op.grid.shape
    mat = np.empty((n, n), dtype=complex)
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        unit = np.zeros((stop - start, n), dtype=complex)
        unit[np.arange(stop - start), np.arange(start, stop)] = 1.0
        cols = op.apply_array(unit.reshape((-1,) + shape))
        mat[:, start:stop] = cols.reshape(stop - start, n).T
    return mat
