"""Input checks shared by the estimator wrappers."""

import numpy as np

from .grid import ContrastField, GridFunction, TrigGrid


def check_grid_array(X, grid: TrigGrid, name: str = "X", leading: tuple = (), dtype=complex):
    """Coerce ``X`` to an array of shape ``leading + grid.shape`` with finite entries."""
    if isinstance(X, GridFunction):
        X = X.nodal().values
    arr = np.asarray(X, dtype=dtype)
    expected = tuple(leading) + grid.shape
    if arr.shape != expected:
        if arr.size == int(np.prod(expected)):
            arr = arr.reshape(expected)
        else:
            raise ValueError(f"{name} has shape {arr.shape}, expected {expected}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_contrast(X, grid: TrigGrid) -> ContrastField:
    if isinstance(X, ContrastField):
        if X.grid != grid:
            raise ValueError(f"contrast lives on {X.grid}, estimator grid is {grid}")
        return X
    arr = check_grid_array(X, grid, "contrast", dtype=float)
    if np.any(arr <= -1):
        raise ValueError("contrast must exceed -1 (positive interior wave speed)")
    return ContrastField(grid, arr)


def check_positive(value, name):
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value
