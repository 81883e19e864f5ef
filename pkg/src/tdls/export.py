"""Plain-text outputs: frame CSVs, run manifests, results tables, plot data."""

from __future__ import annotations

import csv
import json
import math
import os
from pathlib import Path

import numpy as np

from .cq import TimeDomainSolution, stability_quantities


def _report_record(rep) -> dict:
    return {
        "iterations": rep.iterations,
        "final_residual": rep.final_residual,
        "converged": rep.converged,
        "wall_time": rep.wall_time,
        "method": rep.method,
    }


def solution_record(sol: TimeDomainSolution) -> dict:
    sch = sol.scheme
    return {
        "scheme": {"method": sch.method, "order": sch.p, "M": sch.M, "T": sch.T,
                   "dt": sch.dt, "lambda": sch.lam},
        "grid": {"d": sol.grid.d, "N": sol.grid.N, "rho": sol.grid.rho, "h": sol.grid.h},
        "stability": stability_quantities(sch, sol.grid.N),
        "frequency_solves": [
            {"m": m, "s": [sol.nodes[m].s.real, sol.nodes[m].s.imag], **_report_record(rep)}
            for m, rep in sorted(sol.reports.items())
        ],
        "wall_time": sol.wall_time,
    }


def write_frame_csv(sol: TimeDomainSolution, m: int, path) -> None:
    """Node coordinates followed by Re u and Im u, in increasing index order."""
    grid = sol.grid
    coords = [grid.to_centered(x).ravel() for x in grid.coordinates()]
    vals = grid.to_centered(sol.frames[m]).ravel()
    names = ["x1", "x2", "x3"][: grid.d]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names + ["re_u", "im_u"])
        for k in range(vals.size):
            w.writerow([repr(float(c[k])) for c in coords]
                       + [repr(float(vals[k].real)), repr(float(vals[k].imag))])


def export_snapshots(sol: TimeDomainSolution, out_dir, stride: int = 1) -> list[str]:
    """Write frame_XXXXX.csv for every ``stride``-th frame (always the last one)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stride = max(1, stride)
    picks = list(range(0, sol.scheme.M + 1, stride))
    if picks[-1] != sol.scheme.M:
        picks.append(sol.scheme.M)
    names = []
    for m in picks:
        name = f"frame_{m:05d}.csv"
        write_frame_csv(sol, m, out / name)
        names.append(name)
    return names


def write_manifest(record: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(record), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


class ResultsWriter:
    """CSV writer that flushes every row, so partial results survive failures."""

    def __init__(self, path, columns, comments=()):
        self.path = Path(path)
        self.columns = list(columns)
        self._fh = open(self.path, "w", newline="")
        for line in comments:
            self._fh.write(f"# {line}\n")
        self._w = csv.writer(self._fh)
        self._w.writerow(self.columns)
        self._fh.flush()

    def row(self, **values):
        self._w.writerow([_fmt(values.get(c, "")) for c in self.columns])
        self._fh.flush()
        os.fsync(self._fh.fileno())

    def failed(self, message):
        self._w.writerow(["FAILED"] + [""] * (len(self.columns) - 2) + [message])
        self._fh.flush()

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def read_results(path) -> tuple[list[str], list[dict], list[str]]:
    """Columns, data rows and comment lines of a results CSV."""
    comments, lines = [], []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                comments.append(line[1:].strip())
            elif line.strip():
                lines.append(line)
    if not lines:
        raise ValueError(f"{path} has no header row")
    reader = csv.reader(lines)
    header = next(reader)
    rows = []
    for rec in reader:
        if len(rec) != len(header):
            raise ValueError(f"malformed row in {path}: {rec}")
        rows.append(dict(zip(header, rec)))
    return header, rows, comments


def emit_plot_data(results_path, out_dir=None) -> list[Path]:
    """Gnuplot-ready .dat files from a sweep results CSV.

    One file per fixed parameter: error against M (time sweeps, one file per
    N) or against N (space sweeps, one file per M).  The observed-order
    column is left out on the first line of each file.
    """
    header, rows, comments = read_results(results_path)
    out = Path(out_dir) if out_dir is not None else Path(results_path).parent
    out.mkdir(parents=True, exist_ok=True)
    required = {"sweep", "N", "M", "error"}
    if not required <= set(header):
        raise ValueError(f"{results_path} is not a sweep results file (needs {sorted(required)})")
    if not rows:
        sweep = _sweep_from_comments(comments)
        path = out / f"{sweep or 'sweep'}.dat"
        path.write_text(f"# {_axis_label(sweep)} error observed_order\n")
        return [path]

    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        if row["sweep"] == "FAILED":
            continue
        if row["sweep"] not in ("time", "space"):
            raise ValueError(f"unknown sweep kind {row['sweep']!r}")
        fixed = ("N", row["N"]) if row["sweep"] == "time" else ("M", row["M"])
        groups.setdefault((row["sweep"],) + fixed, []).append(row)

    paths = []
    for (sweep, fixed_name, fixed_val), group in groups.items():
        axis = "M" if sweep == "time" else "N"
        path = out / f"sweep_{sweep}_{fixed_name}{fixed_val}.dat"
        lines = [f"# {axis} error observed_order  ({fixed_name} = {fixed_val})"]
        for k, row in enumerate(group):
            x, err = int(row[axis]), float(row["error"])
            if not (math.isfinite(err) and err > 0):
                raise ValueError(f"non-positive error in {results_path}: {row}")
            order = row.get("observed_order", "")
            if k == 0 or order == "":
                lines.append(f"{x} {err!r}")
            else:
                lines.append(f"{x} {err!r} {float(order)!r}")
        path.write_text("\n".join(lines) + "\n")
        paths.append(path)
    return paths


def _sweep_from_comments(comments):
    for c in comments:
        if c.startswith("sweep:"):
            return "sweep_" + c.split(":", 1)[1].strip()
    return None


def _axis_label(sweep):
    return "N" if sweep and "space" in sweep else "M"
