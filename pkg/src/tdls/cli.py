"""Command-line front end.

    tdls <mode> --config FILE [--workers K] [--out DIR]
    tdls plot-data RESULTS.csv [--out DIR]

Exit codes: 0 success, 1 configuration error, 2 solver non-convergence (or
a failed kernel self-test).
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import MODES, ConfigError, ExperimentConfig, config_record, load_config, with_output
from .cq import (
    CQConfigError,
    PipelineError,
    run_cq_solve,
    self_convergence_error,
    stability_quantities,
)
from .disk import DiskConfig, disk_series_field
from .export import ResultsWriter, emit_plot_data, export_snapshots, solution_record, write_manifest
from .grid import GridFunction, make_grid, weighted_l2_norm
from .kernel import build_kernel_table, kernel_coeff_quadrature_oracle, write_kernel_csv
from .operator import make_operator, rhs_from_incident
from .solvers import solve_frequency

logger = logging.getLogger("tdls")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2
SELFTEST_LIMIT = 1e-8


class NonConvergence(RuntimeError):
    pass


def _grid(cfg: ExperimentConfig, N: int):
    g = cfg.geometry
    grid = make_grid(g.d, N, g.rho)
    return grid, g.contrast(grid)


def _observed_order(prev, cur, x_prev, x_cur):
    if prev is None or not (prev > 0 and cur > 0):
        return ""
    return math.log(prev / cur) / math.log(x_cur / x_prev)


def _run_single_freq(cfg, out, manifest):
    grid, q = _grid(cfg, cfg.geometry.N[0])
    s = complex(cfg.s)
    cols = ["N", "s_re", "s_im", "rel_error", "iterations", "final_residual", "converged",
            "wall_time"]
    with ResultsWriter(out / "results.csv", cols, ["mode: single-freq",
                                                   "error: relative weighted l2 vs disk series"]) as w:
        op = make_operator(grid, s, q, cfg.c0)
        ui = GridFunction(grid, np.exp(-s * grid.coordinates()[0] / cfg.c0))
        u, rep = solve_frequency(op, rhs_from_incident(op, ui), cfg.solver)
        err = float("nan")
        if cfg.geometry.scatterer == "disk":
            dc = DiskConfig(cfg.geometry.radius, cfg.geometry.q, s, cfg.c0, cfg.n_max)
            ref = GridFunction(grid, disk_series_field(dc, *grid.coordinates()))
            err = weighted_l2_norm(u - ref, q) / weighted_l2_norm(ref, q)
        manifest["solve"] = {"iterations": rep.iterations, "final_residual": rep.final_residual,
                             "converged": rep.converged, "rel_error_vs_disk": err}
        if not rep.converged:
            w.failed("frequency solve did not converge")
            raise NonConvergence(f"solve at s={s} did not converge")
        w.row(N=grid.N, s_re=s.real, s_im=s.imag, rel_error=err, iterations=rep.iterations,
              final_residual=rep.final_residual, converged=rep.converged, wall_time=rep.wall_time)


def _run_cq(cfg, out, manifest):
    grid, q = _grid(cfg, cfg.geometry.N[0])
    scheme = cfg.scheme.scheme(cfg.scheme.M[0])
    cols = ["m", "t", "max_abs_u", "weighted_norm", "file"]
    with ResultsWriter(out / "results.csv", cols, ["mode: cq-run"]) as w:
        try:
            sol = run_cq_solve(grid, q, scheme, cfg.solver, cfg.incident, workers=cfg.workers)
        except PipelineError as exc:
            w.failed(str(exc))
            raise
        manifest["run"] = solution_record(sol)
        files = {}
        if cfg.frame_stride > 0:
            names = export_snapshots(sol, out / "frames", cfg.frame_stride)
            files = {int(n[6:11]): f"frames/{n}" for n in names}
        for m in range(sol.scheme.M + 1):
            f = sol.frame(m)
            w.row(m=m, t=float(sol.times[m]), max_abs_u=float(np.abs(f.values).max()),
                  weighted_norm=weighted_l2_norm(f, q), file=files.get(m, ""))


def _sweep_row_writer(out, comments):
    cols = ["sweep", "N", "M", "dt", "error", "observed_order", "wall_time"]
    return ResultsWriter(out / "results.csv", cols, comments)


def _run_sweep_time(cfg, out, manifest):
    N = cfg.geometry.N[0]
    grid, q = _grid(cfg, N)
    Ms = cfg.scheme.M
    comments = ["sweep: time", f"reference: finest run M={Ms[-1]} N={N}",
                "error: relative space-time weighted norm vs reference"]
    runs = []
    with _sweep_row_writer(out, comments) as w:
        try:
            ref = run_cq_solve(grid, q, cfg.scheme.scheme(Ms[-1]), cfg.solver, cfg.incident,
                               workers=cfg.workers)
            runs.append(solution_record(ref))
            prev = None
            for k, M in enumerate(Ms[:-1]):
                sol = run_cq_solve(grid, q, cfg.scheme.scheme(M), cfg.solver, cfg.incident,
                                   workers=cfg.workers)
                runs.append(solution_record(sol))
                err = self_convergence_error(sol, ref)
                order = _observed_order(prev, err, Ms[k - 1] if k else None, M)
                w.row(sweep="time", N=N, M=M, dt=sol.scheme.dt, error=err,
                      observed_order=order, wall_time=sol.wall_time)
                prev = err
        except PipelineError as exc:
            w.failed(str(exc))
            raise
        finally:
            manifest["runs"] = runs


def _run_sweep_space(cfg, out, manifest):
    Ns = cfg.geometry.N
    comments = ["sweep: space", f"reference: finest run N={Ns[-1]} for each M",
                "error: relative space-time weighted norm vs reference"]
    runs = []
    with _sweep_row_writer(out, comments) as w:
        try:
            for M in cfg.scheme.M:
                scheme = cfg.scheme.scheme(M)
                grid, q = _grid(cfg, Ns[-1])
                ref = run_cq_solve(grid, q, scheme, cfg.solver, cfg.incident, workers=cfg.workers)
                runs.append(solution_record(ref))
                prev = None
                for k, N in enumerate(Ns[:-1]):
                    grid, q = _grid(cfg, N)
                    sol = run_cq_solve(grid, q, scheme, cfg.solver, cfg.incident,
                                       workers=cfg.workers)
                    runs.append(solution_record(sol))
                    err = self_convergence_error(sol, ref)
                    order = _observed_order(prev, err, Ns[k - 1] if k else None, N)
                    w.row(sweep="space", N=N, M=M, dt=scheme.dt, error=err,
                          observed_order=order, wall_time=sol.wall_time)
                    prev = err
                del ref
        except PipelineError as exc:
            w.failed(str(exc))
            raise
        finally:
            manifest["runs"] = runs


def _run_kernel_selftest(cfg, out, manifest):
    g = cfg.geometry
    grid = make_grid(g.d, g.N[0], g.rho)
    s = complex(cfg.s)
    table = build_kernel_table(grid, s, cfg.c0)
    rng = np.random.default_rng(cfg.seed)
    flat = rng.choice(grid.size, size=min(cfg.selftest_samples, grid.size), replace=False)
    rel = np.full(grid.shape, np.nan)
    idx_arrays = grid.index_arrays()
    for f in np.sort(flat):
        pos = np.unravel_index(f, grid.shape)
        j = tuple(int(kk[pos]) for kk in idx_arrays)
        ref = kernel_coeff_quadrature_oracle(j, s, grid.rho, cfg.c0, tol=cfg.selftest_tol, d=g.d)
        rel[pos] = abs(table.coeffs[pos] - ref) / abs(ref)
    write_kernel_csv(table, out / "kernel.csv", oracle_error=rel)
    max_err = float(np.nanmax(rel))
    min_abs = float(np.min(np.abs(table.coeffs)))
    passed = max_err <= SELFTEST_LIMIT and min_abs > 0
    cols = ["d", "N", "s_re", "s_im", "checked", "max_rel_error", "min_abs_kappa", "passed"]
    with ResultsWriter(out / "results.csv", cols, ["mode: kernel-selftest",
                                                   f"limit: {SELFTEST_LIMIT:g}"]) as w:
        w.row(d=g.d, N=grid.N, s_re=s.real, s_im=s.imag, checked=int(flat.size),
              max_rel_error=max_err, min_abs_kappa=min_abs, passed=passed)
    manifest["selftest"] = {"max_rel_error": max_err, "min_abs_kappa": min_abs, "passed": passed}
    if not passed:
        raise NonConvergence(f"kernel self-test failed: max relative error {max_err:.3e}")


RUNNERS = {
    "single-freq": _run_single_freq,
    "cq-run": _run_cq,
    "sweep-time": _run_sweep_time,
    "sweep-space": _run_sweep_space,
    "kernel-selftest": _run_kernel_selftest,
}


def run(config_path, mode=None, out=None, workers=None) -> int:
    """Run one experiment; returns the process exit code."""
    try:
        cfg = with_output(load_config(config_path, mode), out, workers)
    except (ConfigError, CQConfigError, ValueError) as exc:
        logger.error("configuration error: %s", exc)
        return EXIT_CONFIG
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {"tdls_version": __version__, "config": config_record(cfg)}
    if cfg.mode not in ("kernel-selftest", "single-freq"):
        manifest["stability"] = [
            stability_quantities(cfg.scheme.scheme(M), N)
            for M in cfg.scheme.M for N in cfg.geometry.N
        ]
    t0 = time.perf_counter()
    code = EXIT_OK
    try:
        RUNNERS[cfg.mode](cfg, out_dir, manifest)
        manifest["status"] = "ok"
    except (PipelineError, NonConvergence) as exc:
        logger.error("%s", exc)
        manifest["status"] = f"FAILED: {exc}"
        code = EXIT_SOLVER
    except (ConfigError, CQConfigError) as exc:
        logger.error("configuration error: %s", exc)
        manifest["status"] = f"FAILED: {exc}"
        code = EXIT_CONFIG
    manifest["wall_time"] = time.perf_counter() - t0
    write_manifest(manifest, out_dir / "manifest.json")
    if code == EXIT_OK and cfg.mode in ("sweep-time", "sweep-space"):
        emit_plot_data(out_dir / "results.csv", out_dir)
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tdls", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        p = sub.add_parser(mode)
        p.add_argument("--config", required=True, help="INI experiment configuration")
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--out", default=None, help="output directory (overrides the config)")
    p = sub.add_parser("plot-data", help="write gnuplot .dat files from a sweep results.csv")
    p.add_argument("results")
    p.add_argument("--out", default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.mode == "plot-data":
        try:
            for path in emit_plot_data(args.results, args.out):
                print(path)
        except (OSError, ValueError) as exc:
            logger.error("%s", exc)
            return EXIT_CONFIG
        return EXIT_OK
    return run(args.config, args.mode, args.out, args.workers)


if __name__ == "__main__":
    sys.exit(main())
