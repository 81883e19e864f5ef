import json
import math

import numpy as np
import pytest

from tdls.cli import main
from tdls.export import emit_plot_data, read_results

BASE = """
[experiment]
seed = 0
frame_stride = 5
[geometry]
d = 2
N = {N}
[scheme]
method = BDF2
M = {M}
T = 4
[single_freq]
s = 2+3j
[kernel_selftest]
samples = 15
"""


def _write(tmp_path, N="16", M="20", extra=""):
    p = tmp_path / "exp.ini"
    p.write_text(BASE.format(N=N, M=M) + extra)
    return p


def _run(mode, cfg, out, *extra):
    return main([mode, "--config", str(cfg), "--out", str(out), *extra])


def _strip_wall(path):
    header, rows, comments = read_results(path)
    return comments, [{k: v for k, v in r.items() if k != "wall_time"} for r in rows]


def test_kernel_selftest(tmp_path):
    assert _run("kernel-selftest", _write(tmp_path), tmp_path / "o") == 0
    _, rows, _ = read_results(tmp_path / "o" / "results.csv")
    assert float(rows[0]["max_rel_error"]) <= 1e-8 and rows[0]["passed"] == "True"
    kernel = (tmp_path / "o" / "kernel.csv").read_text().splitlines()
    assert kernel[0].startswith("j1,j2,re_kappa,im_kappa") and len(kernel) == 257


def test_single_freq(tmp_path):
    assert _run("single-freq", _write(tmp_path, N="32"), tmp_path / "o") == 0
    _, rows, _ = read_results(tmp_path / "o" / "results.csv")
    assert float(rows[0]["rel_error"]) < 5e-3
    man = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert man["status"] == "ok" and man["solve"]["converged"]


def test_cq_run_outputs(tmp_path):
    out = tmp_path / "o"
    assert _run("cq-run", _write(tmp_path), out, "--workers", "2") == 0
    _, rows, _ = read_results(out / "results.csv")
    assert len(rows) == 21
    assert sorted(p.name for p in (out / "frames").iterdir()) == [
        f"frame_{m:05d}.csv" for m in (0, 5, 10, 15, 20)]
    frame = (out / "frames" / "frame_00010.csv").read_text().splitlines()
    assert frame[0] == "x1,x2,re_u,im_u" and len(frame) == 257
    man = json.loads((out / "manifest.json").read_text())
    run = man["run"]
    assert 0 < run["scheme"]["lambda"] < 1 and len(run["frequency_solves"]) == 11
    assert man["stability"][0]["N"] == 16 and "constraint_value" in man["stability"][0]
    assert man["config"]["workers"] == 2


def test_sweep_time_and_plot_data(tmp_path):
    out = tmp_path / "o"
    assert _run("sweep-time", _write(tmp_path, M="25, 50, 100, 200"), out) == 0
    header, rows, comments = read_results(out / "results.csv")
    assert any(c.startswith("reference:") and "M=200" in c for c in comments)
    assert [int(r["M"]) for r in rows] == [25, 50, 100]
    assert rows[0]["observed_order"] == ""
    errs = [float(r["error"]) for r in rows]
    assert errs[0] > errs[1] > errs[2]
    assert float(rows[2]["observed_order"]) == pytest.approx(math.log2(errs[1] / errs[2]))
    dat = (out / "sweep_time_N16.dat").read_text().splitlines()
    assert dat[0].startswith("#") and len(dat[1].split()) == 2 and len(dat[2].split()) == 3
    for line in dat[1:]:
        vals = [float(v) for v in line.split()]
        assert all(math.isfinite(v) and v > 0 for v in vals[:2])


def test_sweep_space(tmp_path):
    cfg = _write(tmp_path, N="8, 16, 32", M="20")
    assert _run("sweep-space", cfg, tmp_path / "o") == 0
    _, rows, _ = read_results(tmp_path / "o" / "results.csv")
    assert [int(r["N"]) for r in rows] == [8, 16]
    assert (tmp_path / "o" / "sweep_space_M20.dat").exists()


def test_determinism(tmp_path):
    cfg = _write(tmp_path, M="10, 20, 40")
    assert _run("sweep-time", cfg, tmp_path / "a") == 0
    assert _run("sweep-time", cfg, tmp_path / "b") == 0
    assert _strip_wall(tmp_path / "a" / "results.csv") == _strip_wall(tmp_path / "b" / "results.csv")
    assert _run("kernel-selftest", cfg, tmp_path / "c") == 0
    assert _run("kernel-selftest", cfg, tmp_path / "d") == 0
    assert (tmp_path / "c" / "results.csv").read_bytes() == (tmp_path / "d" / "results.csv").read_bytes()
    assert (tmp_path / "c" / "kernel.csv").read_bytes() == (tmp_path / "d" / "kernel.csv").read_bytes()


def test_exit_code_config_error(tmp_path):
    assert _run("cq-run", _write(tmp_path, N="15"), tmp_path / "o") == 1
    assert _run("cq-run", tmp_path / "nope.ini", tmp_path / "o") == 1


def test_exit_code_non_convergence(tmp_path):
    cfg = _write(tmp_path, M="10, 20", extra="[solver]\nmax_iter = 1\ntol = 1e-14\n")
    out = tmp_path / "o"
    assert _run("sweep-time", cfg, out) == 2
    _, rows, _ = read_results(out / "results.csv")
    assert rows[-1]["sweep"] == "FAILED"
    assert json.loads((out / "manifest.json").read_text())["status"].startswith("FAILED")


def test_plot_data_edge_cases(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("# sweep: time\nsweep,N,M,dt,error,observed_order,wall_time\n")
    (path,) = emit_plot_data(empty, tmp_path / "e")
    assert path.read_text().startswith("#") and len(path.read_text().splitlines()) == 1

    two = tmp_path / "two.csv"
    two.write_text("sweep,N,M,dt,error,observed_order,wall_time\n"
                   "time,32,25,0.16,0.01,,1\ntime,32,50,0.08,0.0025,2.0,1\n")
    (path,) = emit_plot_data(two, tmp_path / "t")
    lines = path.read_text().splitlines()
    assert len(lines) == 3 and lines[1].split() == ["25", "0.01"] and lines[2].split()[2] == "2.0"

    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2,3\n")
    with pytest.raises(ValueError):
        emit_plot_data(bad)
    assert main(["plot-data", str(bad)]) == 1
    assert main(["plot-data", str(two), "--out", str(tmp_path / "cli")]) == 0


def test_frame_csv_values_match_solution(tmp_path):
    from tdls.cq import CQScheme, run_cq_solve
    from tdls.export import write_frame_csv
    from tdls.grid import disk_contrast, make_grid
    from tdls.solvers import SolverConfig

    g = make_grid(2, 8, 0.275)
    sol = run_cq_solve(g, disk_contrast(g, 0.275, -0.5), CQScheme(M=6), SolverConfig(tol=1e-12))
    write_frame_csv(sol, 3, tmp_path / "f.csv")
    data = np.loadtxt(tmp_path / "f.csv", delimiter=",", skiprows=1)
    centred = g.to_centered(sol.frames[3]).ravel()
    np.testing.assert_array_equal(data[:, 2], centred.real)
    np.testing.assert_array_equal(data[:, 0], g.to_centered(g.coordinates()[0]).ravel())
