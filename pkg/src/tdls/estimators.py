"""Scikit-learn style front ends.

``fit`` takes the contrast sampled on the grid and prepares the solver;
``predict`` maps an incident field to the scattered field.  Parameters are
plain constructor arguments, so ``get_params``/``set_params``/``clone`` work.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_contrast, check_grid_array, check_positive
from .cq import CQScheme, IncidentParams, run_cq_solve
from .grid import GridFunction, disk_contrast, make_grid
from .operator import make_operator, rhs_from_incident
from .solvers import SolverConfig, solve_frequency


def _disk_or_array(X, grid):
    if isinstance(X, dict):
        return disk_contrast(grid, X["radius"], X["q"], X.get("sampling", "cell"))
    return check_contrast(X, grid)


class FrequencyDomainScatterer(BaseEstimator):
    """Lippmann-Schwinger solve at a single complex frequency ``s``.

    Parameters
    ----------
    d, N, rho : grid dimension, points per axis and half-size parameter.
    s : complex Laplace parameter with positive real part.
    c0 : background wave speed.
    method, tol, max_iter, restart, coarse_N : solver settings.

    ``fit(X)`` accepts the contrast as an array on the grid (wrap-around
    layout), a :class:`~tdls.grid.ContrastField`, or a dict
    ``{"radius": r, "q": q}`` for a homogeneous disk.
    """

    def __init__(self, d=2, N=64, rho=0.275, s=2 + 3j, c0=1.0, method="gmres",
                 tol=1e-10, max_iter=400, restart=50, coarse_N=None):
        self.d = d
        self.N = N
        self.rho = rho
        self.s = s
        self.c0 = c0
        self.method = method
        self.tol = tol
        self.max_iter = max_iter
        self.restart = restart
        self.coarse_N = coarse_N

    def _solver_config(self):
        return SolverConfig(self.method, self.tol, self.max_iter, self.restart, self.coarse_N)

    def fit(self, X, y=None):
        check_positive(self.c0, "c0")
        self.grid_ = make_grid(self.d, self.N, self.rho)
        self.contrast_ = _disk_or_array(X, self.grid_)
        self.operator_ = make_operator(self.grid_, self.s, self.contrast_, self.c0)
        self.solver_config_ = self._solver_config()
        return self

    def predict(self, X):
        """Scattered field (nodal values) for the incident field ``X``."""
        check_is_fitted(self, "operator_")
        ui = check_grid_array(X, self.grid_, "incident field")
        rhs = rhs_from_incident(self.operator_, GridFunction(self.grid_, ui))
        u, report = solve_frequency(self.operator_, rhs, self.solver_config_)
        self.report_ = report
        return np.array(u.values)

    def plane_wave(self):
        """Nodal samples of exp(-s x1/c0)."""
        check_is_fitted(self, "grid_")
        return np.exp(-complex(self.s) * self.grid_.coordinates()[0] / self.c0)


class CQScatterer(BaseEstimator):
    """Time-domain scattering by convolution quadrature.

    ``fit(X)`` takes the contrast like :class:`FrequencyDomainScatterer`.
    ``predict()`` runs the pulse described by ``a``, ``b``, ``delay``;
    ``predict(samples)`` instead uses incident samples of shape
    ``(M+1,) + grid shape``.  Both return the frames ``u_m``, m = 0..M.
    """

    def __init__(self, d=2, N=32, rho=0.275, c0=1.0, scheme="BDF2", M=100, T=4.0,
                 lam=None, method="gmres", tol=1e-12, max_iter=400, restart=50,
                 coarse_N=None, a=4.0, b=1.4, delay=2.0, workers=1):
        self.d = d
        self.N = N
        self.rho = rho
        self.c0 = c0
        self.scheme = scheme
        self.M = M
        self.T = T
        self.lam = lam
        self.method = method
        self.tol = tol
        self.max_iter = max_iter
        self.restart = restart
        self.coarse_N = coarse_N
        self.a = a
        self.b = b
        self.delay = delay
        self.workers = workers

    def fit(self, X, y=None):
        check_positive(self.c0, "c0")
        self.grid_ = make_grid(self.d, self.N, self.rho)
        self.contrast_ = _disk_or_array(X, self.grid_)
        self.cq_scheme_ = CQScheme(self.scheme, self.M, self.T, self.lam)
        self.solver_config_ = SolverConfig(self.method, self.tol, self.max_iter,
                                           self.restart, self.coarse_N)
        return self

    def predict(self, X=None):
        check_is_fitted(self, "cq_scheme_")
        if X is None:
            incident = IncidentParams(self.a, self.b, self.c0, self.delay)
        else:
            incident = check_grid_array(X, self.grid_, "incident samples",
                                        leading=(self.M + 1,), dtype=float)
        sol = run_cq_solve(self.grid_, self.contrast_, self.cq_scheme_, self.solver_config_,
                           incident, workers=self.workers, c0=self.c0)
        self.solution_ = sol
        self.lambda_ = sol.scheme.lam
        return np.array(sol.frames)
