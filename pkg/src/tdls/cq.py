"""Convolution quadrature in time via the scaled-DFT (multi-frequency) route.

For a multistep symbol ``delta`` and step ``dt`` the time-discrete scattered
field has generating function ``U(zeta) = K(delta(zeta)/dt) U_inc(zeta)``.
Sampling on the circle ``zeta_m = lam * xi**m`` with ``xi = exp(-2 pi i/(M+1))``
turns the forward and inverse transforms into FFTs along the time axis:

    U_inc_m = sum_j lam**j u_inc(t_j) xi**(j m)
    u_n     = lam**(-n) / (M+1) * sum_m U_m xi**(-n m)
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .grid import ContrastField, GridFunction, GridMismatchError, TrigGrid, restrict_nodal
from .kernel import ComplexFrequency
from .operator import make_operator, rhs_from_incident
from .solvers import SolverConfig, SolveReport, solve_frequency

logger = logging.getLogger(__name__)

BDF_ORDER = {"BDF1": 1, "BDF2": 2}
MACHINE_EPS = float(np.finfo(float).eps)


class CQConfigError(ValueError):
    pass


class PipelineError(RuntimeError):
    def __init__(self, message, node=None, report=None):
        super().__init__(message)
        self.node = node
        self.report = report


def bdf_delta(method: str, xi):
    """Generating symbol of the BDF method: 1 - xi or (xi^2 - 4 xi + 3)/2."""
    xi = np.asarray(xi)
    if method == "BDF1":
        out = 1.0 - xi
    elif method == "BDF2":
        out = (xi**2 - 4.0 * xi + 3.0) / 2.0
    else:
        raise CQConfigError(f"unknown multistep method {method!r}")
    return out[()] if out.ndim == 0 else out


def choose_lambda(M: int, eps_machine: float = MACHINE_EPS) -> float:
    """Scaling with lam^(M+1) = sqrt(eps): balances aliasing against lam^-M growth."""
    if M < 1:
        raise CQConfigError("M must be at least 1")
    return float(eps_machine ** (1.0 / (2 * (M + 1))))


@dataclass(frozen=True)
class CQScheme:
    method: str = "BDF2"
    M: int = 100
    T: float = 4.0
    lam: float | None = None
    sigma0_floor: float = 1e-8

    def __post_init__(self):
        if self.method not in BDF_ORDER:
            raise CQConfigError(f"method must be BDF1 or BDF2, got {self.method!r}")
        if int(self.M) != self.M or self.M < 1:
            raise CQConfigError(f"M must be a positive integer, got {self.M}")
        if not self.T > 0:
            raise CQConfigError("T must be positive")
        if self.lam is not None and not 0 < self.lam < 1:
            raise CQConfigError(f"lambda must lie in (0, 1), got {self.lam}")
        # BDF1/BDF2 symbols are polynomials: no poles anywhere

    @property
    def p(self) -> int:
        return BDF_ORDER[self.method]

    @property
    def dt(self) -> float:
        return self.T / self.M

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.M + 1) * self.dt

    @property
    def xi(self) -> complex:
        return complex(np.exp(-2j * np.pi / (self.M + 1)))

    def resolved(self, eps: float = MACHINE_EPS) -> CQScheme:
        """Copy with ``lam`` filled in by :func:`choose_lambda` when unset."""
        if self.lam is not None:
            return self
        return CQScheme(self.method, self.M, self.T, choose_lambda(self.M, eps), self.sigma0_floor)

    def with_M(self, M: int) -> CQScheme:
        return CQScheme(self.method, M, self.T, self.lam, self.sigma0_floor)

    def symbol_bound(self) -> float:
        """sup of |delta| over the closed unit disk (attained on the circle)."""
        theta = np.linspace(0, 2 * np.pi, 4097)
        return float(np.max(np.abs(bdf_delta(self.method, np.exp(1j * theta)))))


def frequency_nodes(scheme: CQScheme) -> list[ComplexFrequency]:
    """s_m = delta(lam xi^m)/dt for m = 0..M."""
    if scheme.lam is None:
        scheme = scheme.resolved()
    m = np.arange(scheme.M + 1)
    zeta = scheme.lam * np.exp(-2j * np.pi * m / (scheme.M + 1))
    s = bdf_delta(scheme.method, zeta) / scheme.dt
    bad = np.nonzero(s.real < scheme.sigma0_floor)[0]
    if bad.size:
        raise CQConfigError(
            f"node m={bad[0]} has Re(s)={s[bad[0]].real:.3e} below the floor "
            f"{scheme.sigma0_floor:g}; use a smaller lambda or a different M"
        )
    return [ComplexFrequency(v) for v in s]


def _check_length(arr: np.ndarray, expected: int | None):
    if expected is not None and arr.shape[0] != expected:
        raise CQConfigError(f"expected {expected} time samples, got {arr.shape[0]}")


def scaled_forward_transform(samples, lam: float, length: int | None = None) -> np.ndarray:
    """hat g_m = sum_j lam^j g_j xi^(j m) along axis 0."""
    g = np.asarray(samples)
    _check_length(g, length)
    weights = lam ** np.arange(g.shape[0], dtype=float)
    return np.fft.fft(weights.reshape((-1,) + (1,) * (g.ndim - 1)) * g, axis=0)


def scaled_inverse_transform(freq_fields, lam: float, length: int | None = None) -> np.ndarray:
    """u_m = lam^(-m)/(M+1) sum_j U_j xi^(-j m) along axis 0."""
    U = np.asarray(freq_fields)
    _check_length(U, length)
    weights = lam ** (-np.arange(U.shape[0], dtype=float))
    return weights.reshape((-1,) + (1,) * (U.ndim - 1)) * np.fft.ifft(U, axis=0)


@dataclass(frozen=True)
class IncidentParams:
    a: float = 4.0
    b: float = 1.4
    c0: float = 1.0
    delay: float = 0.0


# the experiment's pulse: centred at t = 2 so that it is nearly causal on the disk
DEFAULT_PULSE = IncidentParams(a=4.0, b=1.4, c0=1.0, delay=2.0)


def incident_field(x1, t, params: IncidentParams = IncidentParams()):
    """Modulated Gaussian plane wave sin(a tau) exp(-b tau^2), tau = t - delay - x1/c0."""
    tau = np.asarray(t) - params.delay - np.asarray(x1) / params.c0
    return np.sin(params.a * tau) * np.exp(-params.b * tau**2)


def sample_incident(grid: TrigGrid, times, params: IncidentParams, mask=None) -> np.ndarray:
    """Incident samples with time along axis 0; ``mask`` keeps selected nodes only."""
    x1 = grid.coordinates()[0]
    if mask is not None:
        x1 = x1[mask]
    t = np.asarray(times).reshape((-1,) + (1,) * x1.ndim)
    return incident_field(x1[None], t, params)


@dataclass
class TimeDomainSolution:
    scheme: CQScheme
    grid: TrigGrid
    frames: np.ndarray
    q: ContrastField | None = None
    reports: dict = field(default_factory=dict)
    nodes: list = field(default_factory=list)
    wall_time: float = 0.0

    def __post_init__(self):
        if self.frames.shape != (self.scheme.M + 1,) + self.grid.shape:
            raise GridMismatchError(
                f"frames of shape {self.frames.shape} do not match M={self.scheme.M} "
                f"on grid {self.grid.shape}"
            )

    def __len__(self):
        return self.frames.shape[0]

    def frame(self, m: int) -> GridFunction:
        return GridFunction(self.grid, self.frames[m])

    @property
    def times(self) -> np.ndarray:
        return self.scheme.times


def stability_quantities(scheme: CQScheme, N: int) -> dict:
    """The pair (dt, N) with the expression dt - B (C1 N)^(-1/13), C1 taken as 1.

    Convergence is only guaranteed when this is positive; it is logged only.
    """
    B = scheme.symbol_bound()
    return {
        "dt": scheme.dt,
        "N": N,
        "symbol_bound_B": B,
        "constraint_value": scheme.dt - B * float(N) ** (-1.0 / 13.0),
        "N_dt13": N * scheme.dt**13,
    }


def run_cq_solve(grid: TrigGrid, q: ContrastField, scheme: CQScheme,
                 cfg: SolverConfig | None = None,
                 incident: IncidentParams = DEFAULT_PULSE,
                 workers: int = 1, use_symmetry: bool = True,
                 c0: float = 1.0) -> TimeDomainSolution:
    """Full CQ solve: transform the incident samples, solve per node, invert.

    ``incident`` is either pulse parameters or an array of samples with
    shape ``(M+1,) + grid.shape``; ``c0`` is only read in the latter case.

    Incident samples only enter through ``q * u_inc``, so only supported
    nodes are transformed.  With real data the node set is closed under
    conjugation, so only ``m <= (M+1)/2`` is solved and the rest reflected.
    """
    cfg = cfg or SolverConfig()
    if q.grid != grid:
        raise GridMismatchError("contrast and grid differ")
    t_start = time.perf_counter()
    scheme = scheme.resolved(max(MACHINE_EPS, cfg.tol))
    L = scheme.M + 1
    nodes = frequency_nodes(scheme)
    stab = stability_quantities(scheme, grid.N)
    logger.info("CQ %s M=%d N=%d lam=%.6f; stability expression %.3e",
                scheme.method, scheme.M, grid.N, scheme.lam, stab["constraint_value"])

    mask = q.support
    frames_hat = np.zeros((L,) + grid.shape, dtype=complex)
    reports: dict[int, SolveReport] = {}
    if not np.any(mask):
        return TimeDomainSolution(scheme, grid, frames_hat, q, reports,
                                  nodes, time.perf_counter() - t_start)

    if isinstance(incident, IncidentParams):
        samples = sample_incident(grid, scheme.times, incident, mask)
    else:
        samples = np.asarray(incident)
        if samples.shape != (L,) + grid.shape:
            raise GridMismatchError(
                f"incident samples of shape {samples.shape}, expected {(L,) + grid.shape}")
        samples = samples[:, mask]
    if np.iscomplexobj(samples) and np.any(samples.imag != 0):
        use_symmetry = False
    inc_hat = scaled_forward_transform(samples, scheme.lam, L)
    todo = list(range(L // 2 + 1)) if use_symmetry else list(range(L))

    c0 = incident.c0 if isinstance(incident, IncidentParams) else c0

    def solve_node(m):
        op = make_operator(grid, nodes[m], q, c0)
        ui = np.zeros(grid.shape, dtype=complex)
        ui[mask] = inc_hat[m]
        rhs = rhs_from_incident(op, GridFunction(grid, ui))
        return solve_frequency(op, rhs, cfg)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(solve_node, todo))
    else:
        results = [solve_node(m) for m in todo]

    for m, (u, rep) in zip(todo, results):
        if not rep.converged:
            raise PipelineError(
                f"frequency solve at node m={m}, s={nodes[m].s:.6g} did not converge "
                f"(residual {rep.final_residual:.3e} after {rep.iterations} iterations)",
                node=m, report=rep)
        reports[m] = rep
        frames_hat[m] = u.values
    if use_symmetry:
        for m in range(1, L):
            if m not in reports:
                frames_hat[m] = np.conj(frames_hat[L - m])

    frames = scaled_inverse_transform(frames_hat, scheme.lam, L)
    return TimeDomainSolution(scheme, grid, frames, q, reports, nodes,
                              time.perf_counter() - t_start)


def spacetime_error_norm(A, B, q: ContrastField) -> float:
    """(sum_m dt * ||A_m - B_m||^2_{L^2_|q|})^(1/2) for solutions on one grid and scheme."""
    if A.grid != B.grid or A.grid != q.grid:
        raise GridMismatchError("space-time norm needs a shared grid")
    if A.scheme.M != B.scheme.M or not np.isclose(A.scheme.T, B.scheme.T):
        raise GridMismatchError("space-time norm needs matching time grids")
    return _spacetime_norm(A.frames - B.frames, q, A.scheme.dt)


def spacetime_norm(sol: TimeDomainSolution, q: ContrastField) -> float:
    return _spacetime_norm(sol.frames, q, sol.scheme.dt)


def _spacetime_norm(frames: np.ndarray, q: ContrastField, dt: float) -> float:
    w = np.abs(q.values) * q.grid.cell_volume
    return float(np.sqrt(dt * np.sum(w * np.abs(frames) ** 2)))


def restrict_solution(sol: TimeDomainSolution, M: int | None = None,
                      grid: TrigGrid | None = None) -> TimeDomainSolution:
    """Subsample a solution onto a coarser time grid and/or nested spatial grid."""
    M = sol.scheme.M if M is None else M
    grid = sol.grid if grid is None else grid
    if sol.scheme.M % M:
        raise GridMismatchError(f"M={M} does not divide M={sol.scheme.M}")
    frames = sol.frames[:: sol.scheme.M // M]
    if grid != sol.grid:
        frames = restrict_nodal(frames, sol.grid, grid)
    q = sol.q.restrict(grid) if sol.q is not None and grid != sol.grid else sol.q
    return TimeDomainSolution(sol.scheme.with_M(M), grid, np.ascontiguousarray(frames), q)


def self_convergence_error(coarse: TimeDomainSolution, reference: TimeDomainSolution,
                           q: ContrastField | None = None, relative: bool = True) -> float:
    """Space-time distance from ``coarse`` to ``reference`` sampled at its points."""
    ref = restrict_solution(reference, coarse.scheme.M, coarse.grid)
    q = q or coarse.q
    err = spacetime_error_norm(coarse, ref, q)
    if relative:
        scale = spacetime_norm(ref, q)
        return err / scale if scale > 0 else err
    return err
