"""Experiment configuration: INI-style key/value file with one section per group.

Example::

    [experiment]
    mode = sweep-time
    seed = 0

    [geometry]
    d = 2
    N = 32
    rho = 0.275
    scatterer = disk
    radius = 0.275
    q = -0.5

    [scheme]
    method = BDF2
    M = 25, 50, 100, 200, 400
    T = 4
    lambda = auto

See README.md for every key and its default.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import asdict, dataclass, field, replace

from .cq import CQScheme, IncidentParams
from .grid import TrigGrid, disk_contrast, mollified_disk_contrast
from .solvers import SolverConfig

MODES = ("single-freq", "cq-run", "sweep-time", "sweep-space", "kernel-selftest")
SCATTERERS = ("disk", "mollified-disk")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Geometry:
    d: int = 2
    N: tuple = (32,)
    rho: float = 0.275
    scatterer: str = "disk"
    radius: float = 0.275
    q: float = -0.5
    ramp_width: float = 0.05
    sampling: str = "cell"

    def contrast(self, grid: TrigGrid):
        if self.scatterer == "disk":
            return disk_contrast(grid, self.radius, self.q, self.sampling)
        return mollified_disk_contrast(grid, self.radius, self.q, self.ramp_width)


@dataclass(frozen=True)
class SchemeSpec:
    method: str = "BDF2"
    M: tuple = (100,)
    T: float = 4.0
    lam: float | None = None

    def scheme(self, M: int) -> CQScheme:
        return CQScheme(self.method, M, self.T, self.lam)


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "cq-run"
    geometry: Geometry = field(default_factory=Geometry)
    scheme: SchemeSpec = field(default_factory=SchemeSpec)
    solver: SolverConfig = field(default_factory=lambda: SolverConfig(tol=1e-12))
    incident: IncidentParams = field(default_factory=lambda: IncidentParams(delay=2.0))
    c0: float = 1.0
    s: complex = 2 + 3j
    n_max: int = 40
    selftest_samples: int = 50
    selftest_tol: float = 1e-10
    output_dir: str = "out"
    seed: int = 0
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)
    frame_stride: int = 0

    def validate(self) -> ExperimentConfig:
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        g = self.geometry
        if g.scatterer not in SCATTERERS:
            raise ConfigError(f"scatterer must be one of {SCATTERERS}")
        if g.sampling not in ("cell", "point"):
            raise ConfigError("sampling must be 'cell' or 'point'")
        if not 1 + g.q > 0:
            raise ConfigError("contrast q must exceed -1")
        if not 0 < g.radius:
            raise ConfigError("radius must be positive")
        if g.scatterer == "disk" and g.sampling == "point" and g.radius > g.rho:
            raise ConfigError("scatterer radius exceeds rho")
        for N in g.N:
            TrigGrid(g.d, N, g.rho)
        if self.mode == "sweep-space":
            _strictly_increasing(g.N, "N")
            if len(g.N) < 2:
                raise ConfigError("sweep-space needs at least two N values")
            for N in g.N:
                if g.N[-1] % N:
                    raise ConfigError(f"N={N} does not divide the reference N={g.N[-1]}")
        elif len(g.N) != 1:
            raise ConfigError(f"mode {self.mode} takes a single N")
        if self.mode == "sweep-time":
            _strictly_increasing(self.scheme.M, "M")
            if len(self.scheme.M) < 2:
                raise ConfigError("sweep-time needs at least two M values")
            for M in self.scheme.M:
                if self.scheme.M[-1] % M:
                    raise ConfigError(f"M={M} does not divide the reference M={self.scheme.M[-1]}")
        elif self.mode in ("cq-run",) and len(self.scheme.M) != 1:
            raise ConfigError("cq-run takes a single M")
        for M in self.scheme.M:
            self.scheme.scheme(M)
        if self.c0 <= 0 or self.workers < 1 or self.frame_stride < 0:
            raise ConfigError("c0 and workers must be positive, frame_stride non-negative")
        if complex(self.s).real <= 0:
            raise ConfigError("s must have positive real part")
        if self.selftest_samples < 1 or not 1e-12 <= self.selftest_tol <= 1e-4:
            raise ConfigError("selftest samples must be >= 1 and tol in [1e-12, 1e-4]")
        return self


def _strictly_increasing(values, name):
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError(f"{name} list must be strictly increasing")


def _int_list(text):
    return tuple(int(v) for v in text.replace(",", " ").split())


def _fmt_list(values):
    return ", ".join(str(v) for v in values)


def _complex(text):
    return complex(text.replace(" ", "").replace("i", "j"))


def parse_config(text: str, mode: str | None = None) -> ExperimentConfig:
    """Parse INI text; ``mode`` (from the command line) overrides the file."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc

    def get(section, key, conv, default):
        if cp.has_option(section, key):
            raw = cp.get(section, key)
            try:
                return conv(raw)
            except ValueError as exc:
                raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from exc
        return default

    base = ExperimentConfig()
    known = {
        "experiment": {"mode", "seed", "output_dir", "workers", "frame_stride"},
        "geometry": {"d", "n", "rho", "scatterer", "radius", "q", "ramp_width", "sampling"},
        "scheme": {"method", "m", "t", "lambda"},
        "solver": {"method", "tol", "max_iter", "restart", "coarse_n"},
        "incident": {"a", "b", "delay", "c0"},
        "single_freq": {"s", "n_max"},
        "kernel_selftest": {"samples", "tol"},
    }
    for section in cp.sections():
        if section not in known:
            raise ConfigError(f"unknown section [{section}]")
        extra = set(cp.options(section)) - known[section]
        if extra:
            raise ConfigError(f"unknown keys in [{section}]: {sorted(extra)}")

    g0 = base.geometry
    geometry = Geometry(
        d=get("geometry", "d", int, g0.d),
        N=get("geometry", "N", _int_list, g0.N),
        rho=get("geometry", "rho", float, g0.rho),
        scatterer=get("geometry", "scatterer", str.strip, g0.scatterer),
        radius=get("geometry", "radius", float, g0.radius),
        q=get("geometry", "q", float, g0.q),
        ramp_width=get("geometry", "ramp_width", float, g0.ramp_width),
        sampling=get("geometry", "sampling", str.strip, g0.sampling),
    )
    lam_text = get("scheme", "lambda", str.strip, "auto")
    try:
        lam = None if lam_text == "auto" else float(lam_text)
    except ValueError as exc:
        raise ConfigError(f"lambda must be 'auto' or a number, got {lam_text!r}") from exc
    s0 = base.scheme
    scheme = SchemeSpec(
        method=get("scheme", "method", str.strip, s0.method),
        M=get("scheme", "M", _int_list, s0.M),
        T=get("scheme", "T", float, s0.T),
        lam=lam,
    )
    sv = base.solver
    coarse = get("solver", "coarse_N", str.strip, "auto")
    inc = base.incident
    c0 = get("incident", "c0", float, base.c0)
    try:
        solver = SolverConfig(
            method=get("solver", "method", str.strip, sv.method),
            tol=get("solver", "tol", float, sv.tol),
            max_iter=get("solver", "max_iter", int, sv.max_iter),
            restart=get("solver", "restart", int, sv.restart),
            coarse_N=None if coarse == "auto" else int(coarse),
        )
        cfg = ExperimentConfig(
            mode=mode or get("experiment", "mode", str.strip, base.mode),
            geometry=geometry,
            scheme=scheme,
            solver=solver,
            incident=IncidentParams(
                a=get("incident", "a", float, inc.a),
                b=get("incident", "b", float, inc.b),
                c0=c0,
                delay=get("incident", "delay", float, inc.delay),
            ),
            c0=c0,
            s=get("single_freq", "s", _complex, base.s),
            n_max=get("single_freq", "n_max", int, base.n_max),
            selftest_samples=get("kernel_selftest", "samples", int, base.selftest_samples),
            selftest_tol=get("kernel_selftest", "tol", float, base.selftest_tol),
            output_dir=get("experiment", "output_dir", str.strip, base.output_dir),
            seed=get("experiment", "seed", int, base.seed),
            workers=get("experiment", "workers", int, base.workers),
            frame_stride=get("experiment", "frame_stride", int, base.frame_stride),
        )
        return cfg.validate()
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path, mode: str | None = None) -> ExperimentConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, mode)


def serialize_config(cfg: ExperimentConfig) -> str:
    """Canonical INI text; parse(serialize(cfg)) == cfg."""
    g, sc, sv, inc = cfg.geometry, cfg.scheme, cfg.solver, cfg.incident
    s = complex(cfg.s)
    sections = {
        "experiment": {
            "mode": cfg.mode, "seed": cfg.seed, "output_dir": cfg.output_dir,
            "workers": cfg.workers, "frame_stride": cfg.frame_stride,
        },
        "geometry": {
            "d": g.d, "N": _fmt_list(g.N), "rho": repr(g.rho), "scatterer": g.scatterer,
            "radius": repr(g.radius), "q": repr(g.q), "ramp_width": repr(g.ramp_width),
            "sampling": g.sampling,
        },
        "scheme": {
            "method": sc.method, "M": _fmt_list(sc.M), "T": repr(sc.T),
            "lambda": "auto" if sc.lam is None else repr(sc.lam),
        },
        "solver": {
            "method": sv.method, "tol": repr(sv.tol), "max_iter": sv.max_iter,
            "restart": sv.restart, "coarse_N": "auto" if sv.coarse_N is None else sv.coarse_N,
        },
        "incident": {"a": repr(inc.a), "b": repr(inc.b), "delay": repr(inc.delay),
                     "c0": repr(cfg.c0)},
        "single_freq": {"s": f"{s.real!r}{s.imag:+}j", "n_max": cfg.n_max},
        "kernel_selftest": {"samples": cfg.selftest_samples, "tol": repr(cfg.selftest_tol)},
    }
    lines = []
    for name, items in sections.items():
        lines.append(f"[{name}]")
        lines.extend(f"{k} = {v}" for k, v in items.items())
        lines.append("")
    return "\n".join(lines)


def config_record(cfg: ExperimentConfig) -> dict:
    """JSON-friendly dict of every parameter."""
    rec = asdict(cfg)
    rec["s"] = [complex(cfg.s).real, complex(cfg.s).imag]
    return rec


def with_output(cfg: ExperimentConfig, output_dir=None, workers=None) -> ExperimentConfig:
    changes = {}
    if output_dir is not None:
        changes["output_dir"] = str(output_dir)
    if workers is not None:
        changes["workers"] = int(workers)
    return replace(cfg, **changes).validate() if changes else cfg
