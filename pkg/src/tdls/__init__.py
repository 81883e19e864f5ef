"""Time-domain acoustic scattering by penetrable media.

Volume integral formulation in the Laplace domain, trigonometric collocation
with an FFT-diagonal periodized kernel, and convolution quadrature in time.
"""

__version__ = "0.1.0"

from .cq import (
    CQScheme,
    IncidentParams,
    PipelineError,
    TimeDomainSolution,
    choose_lambda,
    run_cq_solve,
    self_convergence_error,
)
from .disk import DiskConfig, disk_series_coeffs, disk_series_field
from .estimators import CQScatterer, FrequencyDomainScatterer
from .grid import ContrastField, GridFunction, TrigGrid, disk_contrast, make_grid
from .kernel import ComplexFrequency, ConvergenceError, build_kernel_table, kernel_coeff
from .operator import apply_ls_operator, make_operator, rhs_from_incident
from .solvers import SolverConfig, SolveReport, solve_frequency, two_grid_solve

__all__ = [
    "CQScatterer", "CQScheme", "ComplexFrequency", "ContrastField", "ConvergenceError",
    "DiskConfig", "FrequencyDomainScatterer", "GridFunction", "IncidentParams",
    "PipelineError", "SolveReport", "SolverConfig", "TimeDomainSolution", "TrigGrid",
    "apply_ls_operator", "build_kernel_table", "choose_lambda", "disk_contrast",
    "disk_series_coeffs", "disk_series_field", "kernel_coeff", "make_grid", "make_operator",
    "rhs_from_incident", "run_cq_solve", "self_convergence_error", "solve_frequency",
    "two_grid_solve",
]
