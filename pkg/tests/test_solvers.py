import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tdls.grid import ContrastField, GridFunction, GridMismatchError, disk_contrast, make_grid
from tdls.operator import SizeGuardError, apply_ls_operator, make_operator, rhs_from_incident
from tdls.solvers import SolverConfig, solve_dense_oracle, solve_frequency, two_grid_solve

from .conftest import random_complex


def _disk_problem(N, s=2 + 3j):
    g = make_grid(2, N, 0.275)
    op = make_operator(g, s, disk_contrast(g, 0.275, -0.5))
    ui = GridFunction(g, np.exp(-s * g.coordinates()[0]))
    return op, rhs_from_incident(op, ui)


def _rel(a, b):
    return (a - b).norm() / b.norm()


def _true_residual(op, u, rhs):
    return (rhs - apply_ls_operator(op, u)).norm()


class TestConfig:
    @pytest.mark.parametrize("kw", [{"method": "cg"}, {"tol": 0.0}, {"tol": 0.1}, {"max_iter": 0},
                                    {"restart": 0}, {"coarse_N": 7}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            SolverConfig(**kw)

    def test_coarse_sizes(self):
        cfg = SolverConfig()
        assert [cfg.coarse_size(N) for N in (4, 8, 16, 64, 128)] == [4, 4, 4, 16, 32]
        assert SolverConfig(coarse_N=8).coarse_size(32) == 8
        with pytest.raises(ValueError):
            SolverConfig(coarse_N=32).coarse_size(32)


@pytest.mark.parametrize("method", ["gmres", "two_grid", "dense"])
def test_identity_operator(rng, method):
    g = make_grid(2, 16, 0.275)
    op = make_operator(g, 1 + 1j, ContrastField(g, np.zeros(g.shape)))
    rhs = GridFunction(g, random_complex(rng, g.shape))
    u, rep = solve_frequency(op, rhs, SolverConfig(method=method))
    assert rep.converged and rep.iterations <= 1
    assert _rel(u, rhs) <= 1e-14


@pytest.mark.parametrize("method", ["gmres", "two_grid", "dense"])
def test_zero_rhs_gives_zero(method, disk16):
    grid, q = disk16
    op = make_operator(grid, 2 + 3j, q)
    u, rep = solve_frequency(op, GridFunction(grid, np.zeros(grid.shape)), SolverConfig(method=method))
    assert rep.converged and u.norm() == 0


@pytest.mark.parametrize("method", ["gmres", "two_grid"])
def test_uniqueness_from_random_guess(rng, method, disk16):
    grid, q = disk16
    op = make_operator(grid, 1 + 10j, q)
    cfg = SolverConfig(method=method, tol=1e-10)
    for _ in range(3):
        x0 = GridFunction(grid, random_complex(rng, grid.shape))
        u, rep = solve_frequency(op, GridFunction(grid, np.zeros(grid.shape)), cfg, x0=x0)
        assert rep.converged
        assert u.norm() <= cfg.tol * x0.norm()


@pytest.mark.parametrize("s", [1 + 1j, 2 + 3j, 0.5 - 15j])
def test_cross_method_agreement(s):
    op, rhs = _disk_problem(32, s)
    cfg = dict(tol=1e-11)
    ref = solve_dense_oracle(op, rhs)
    for method in ("gmres", "two_grid"):
        u, rep = solve_frequency(op, rhs, SolverConfig(method=method, **cfg))
        assert rep.converged
        assert _rel(u, ref) <= 10 * cfg["tol"]


def test_gmres_matches_dense_n64():
    op, rhs = _disk_problem(64)
    u, rep = solve_frequency(op, rhs, SolverConfig(tol=1e-12))
    assert rep.converged
    assert _rel(u, solve_dense_oracle(op, rhs)) <= 1e-9


def test_two_grid_matches_gmres_n128():
    op, rhs = _disk_problem(128)
    u1, r1 = solve_frequency(op, rhs, SolverConfig(tol=1e-11))
    u2, r2 = two_grid_solve(op, rhs, SolverConfig(method="two_grid", tol=1e-11, coarse_N=32))
    assert r1.converged and r2.converged
    assert _rel(u2, u1) <= 1e-8


def test_two_grid_iterations_do_not_grow():
    counts = []
    for N in (64, 128, 256):
        op, rhs = _disk_problem(N)
        _, rep = two_grid_solve(op, rhs, SolverConfig(method="two_grid", tol=1e-10, coarse_N=16))
        assert rep.converged
        counts.append(rep.iterations)
    if counts[-1] > counts[0] + 1:
        warnings.warn(f"two-grid iteration counts grew with N: {counts}")
    assert counts[-1] <= 2 * counts[0] + 2


@pytest.mark.parametrize("method", ["gmres", "two_grid", "dense"])
def test_report_consistency(method):
    op, rhs = _disk_problem(16, 1 + 4j)
    cfg = SolverConfig(method=method, tol=1e-9)
    u, rep = solve_frequency(op, rhs, cfg)
    true_res = _true_residual(op, u, rhs)
    assert abs(true_res - rep.final_residual) <= 1e-12
    assert rep.converged and rep.final_residual <= cfg.tol * rhs.norm()
    assert rep.method == method and rep.wall_time >= 0


def test_non_convergence_is_reported():
    op, rhs = _disk_problem(32)
    u, rep = solve_frequency(op, rhs, SolverConfig(tol=1e-14, max_iter=2, restart=50))
    assert not rep.converged and rep.iterations <= 2
    assert abs(_true_residual(op, u, rhs) - rep.final_residual) <= 1e-12


def test_dense_linearity_and_guards(rng, disk16):
    grid, q = disk16
    op = make_operator(grid, 2 + 3j, q)
    f, g = (GridFunction(grid, random_complex(rng, grid.shape)) for _ in range(2))
    lhs = solve_dense_oracle(op, 2 * f + 3j * g)
    rhs = 2 * solve_dense_oracle(op, f) + 3j * solve_dense_oracle(op, g)
    assert _rel(lhs, rhs) <= 1e-12
    big = make_grid(2, 128, 0.275)
    with pytest.raises(SizeGuardError):
        solve_dense_oracle(make_operator(big, 1.0, ContrastField(big, np.zeros(big.shape))),
                           GridFunction(big, np.zeros(big.shape)))
    with pytest.raises(GridMismatchError):
        solve_frequency(op, GridFunction(big, np.zeros(big.shape)))


@settings(max_examples=20, deadline=None)
@given(st.floats(0.5, 5), st.floats(-30, 30), st.integers(0, 2**31 - 1))
def test_property_gmres_residual_contract(sig, om, seed):
    rng = np.random.default_rng(seed)
    g = make_grid(2, 16, 0.275)
    op = make_operator(g, complex(sig, om), ContrastField(g, rng.uniform(-0.5, 0.5, g.shape)))
    rhs = GridFunction(g, random_complex(rng, g.shape))
    u, rep = solve_frequency(op, rhs, SolverConfig(tol=1e-10))
    assert rep.converged
    assert _true_residual(op, u, rhs) <= 1e-10 * rhs.norm()
