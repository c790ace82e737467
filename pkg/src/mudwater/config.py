"""Strict JSON run configuration.

Every section is optional and defaults are filled in; unknown keys and
invalid values are collected and reported together.  Example::

    {
      "params": {"mu_w": 1.0, "rho_w": 1.0, "rho_m": 1.2, "g": 1.0, "gamma": 0.1,
                 "viscosity": {"model": "newtonian", "mu0": 1.0}, "c": 0.6666666666666666},
      "grid": {"Nx": 32, "Ny_w": 17, "Ny_m": 17},
      "initial": {"modes": {"2": [1e-4, 0.0]}},
      "boundary": {"type": "constant", "mean": 0.0},
      "time": {"t_end": 4.0, "dt": 0.02, "scheme": "ifrk4"},
      "solver": {"phi_tol": 1e-9},
      "output": {"dir": "out", "prefix": "run"}
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .evolution import BoundaryData, InterfaceProblem, ModelParams
from .geometry import ADMISSIBLE_RADIUS, PeriodicProfile
from .rheology import EffectiveViscosity, model_from_dict

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_config"]


class ConfigError(ValueError):
    """Invalid configuration; ``problems`` lists every violation found."""

    def __init__(self, message, problems=None):
        super().__init__(message)
        self.problems = list(problems or [message])


@dataclass
class ParamsSection:
    mu_w: float = 1.0
    rho_w: float = 1.0
    rho_m: float = 1.2
    g: float = 1.0
    gamma: float = 0.0
    viscosity: dict = field(default_factory=lambda: {"model": "newtonian", "mu0": 1.0})
    c: float = 2.0 / 3.0
    quadrature_order: int = 64


@dataclass
class GridSection:
    Nx: int = 32
    Ny_w: int = 17
    Ny_m: int = 17


@dataclass
class InitialSection:
    modes: dict = field(default_factory=dict)
    values: list | None = None
    shape: str | None = None
    k: int = 1
    amplitude: float = 0.0


@dataclass
class BoundarySection:
    type: str = "constant"
    mean: float = 0.0
    terms: list = field(default_factory=list)
    times: list = field(default_factory=list)
    profiles: list = field(default_factory=list)


@dataclass
class TimeSection:
    t_end: float = 1.0
    dt: float = 0.01
    dt_max: float | None = None
    scheme: str = "ifrk4"
    adaptive: bool = True


@dataclass
class SolverSection:
    phi_tol: float = 1e-9
    mud_tol: float = 1e-9
    max_newton: int = 30
    gmres_rtol: float = 1e-10
    mud_method: str = "newton"
    guard_f: float = 0.45
    guard_F: float = 10.0
    probe_uniqueness: bool = False
    probe_seed: int = 0


@dataclass
class OutputSection:
    dir: str = "out"
    prefix: str = "run"
    svg: bool = True
    snapshots: int = 6
    modes: list = field(default_factory=list)
    restart_every: int = 0


SECTIONS = {
    "params": ParamsSection,
    "grid": GridSection,
    "initial": InitialSection,
    "boundary": BoundarySection,
    "time": TimeSection,
    "solver": SolverSection,
    "output": OutputSection,
}

# accepted JSON types for fields whose default is null
OPTIONAL_TYPES = {
    ("initial", "values"): (list, dict),
    ("initial", "shape"): str,
    ("time", "dt_max"): (int, float),
}


@dataclass
class RunConfig:
    params: ParamsSection = field(default_factory=ParamsSection)
    grid: GridSection = field(default_factory=GridSection)
    initial: InitialSection = field(default_factory=InitialSection)
    boundary: BoundarySection = field(default_factory=BoundarySection)
    time: TimeSection = field(default_factory=TimeSection)
    solver: SolverSection = field(default_factory=SolverSection)
    output: OutputSection = field(default_factory=OutputSection)
    source: str | None = None

    def __post_init__(self):
        if self.time.dt_max is None:
            self.time.dt_max = self.time.dt

    # builders ---------------------------------------------------------
    def effective_viscosity(self):
        p = self.params
        return EffectiveViscosity(model_from_dict(p.viscosity), c=p.c, order=p.quadrature_order)

    def model_params(self):
        p = self.params
        return ModelParams(mu_w=p.mu_w, rho_w=p.rho_w, rho_m=p.rho_m, g=p.g, gamma=p.gamma,
                           ev=self.effective_viscosity())

    def build_problem(self):
        s = self.solver
        return InterfaceProblem(self.model_params(), Nx=self.grid.Nx, Ny_w=self.grid.Ny_w,
                                Ny_m=self.grid.Ny_m, mud_tol=s.mud_tol, mud_method=s.mud_method,
                                phi_tol=s.phi_tol, max_newton=s.max_newton,
                                gmres_rtol=s.gmres_rtol, probe_seed=s.probe_seed)

    def initial_profile(self):
        ini = self.initial
        N = self.grid.Nx
        if ini.values is not None:
            prof = PeriodicProfile.from_json(ini.values, N)
        elif ini.shape is not None:
            wave = np.cos if ini.shape == "cos" else np.sin
            prof = PeriodicProfile.from_function(lambda x: ini.amplitude * wave(ini.k * x), N)
        else:
            prof = PeriodicProfile.from_modes(ini.modes, N) if ini.modes else PeriodicProfile.zeros(N)
        return prof.project_mean_zero()

    @property
    def boundary_data(self):
        b = self.boundary
        return BoundaryData(kind=b.type, mean=b.mean, terms=b.terms, times=b.times,
                            profiles=b.profiles)

    def h(self, t, N):
        return self.boundary_data(t, N)

    def to_dict(self):
        out = {}
        for name in SECTIONS:
            out[name] = asdict(getattr(self, name))
        return out


def _describe_json_error(text, exc):
    lines = text.splitlines()
    line = lines[exc.lineno - 1] if 0 < exc.lineno <= len(lines) else ""
    return f"line {exc.lineno}, column {exc.colno}: {exc.msg}\n    {line}\n    {' ' * (exc.colno - 1)}^"


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at {_describe_json_error(text, exc)}") from exc
    cfg = parse_config(data, source=str(path))
    return cfg


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def parse_config(data, source=None):
    """Validate a decoded JSON object and return a :class:`RunConfig`."""
    problems = []
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    for key in data:
        if key not in SECTIONS:
            problems.append(f"unknown key {key!r} (allowed: {', '.join(SECTIONS)})")
    sections = {}
    for name, cls in SECTIONS.items():
        raw = data.get(name, {})
        if not isinstance(raw, dict):
            problems.append(f"{name}: must be an object")
            raw = {}
        allowed = {f.name for f in fields(cls)}
        clean = {}
        for key, value in raw.items():
            if key not in allowed:
                problems.append(f"unknown key {name}.{key!r} (allowed: {', '.join(sorted(allowed))})")
            else:
                clean[key] = value
        defaults = cls()
        for f in fields(cls):
            if f.name not in clean:
                continue
            value = clean[f.name]
            expected = getattr(defaults, f.name)
            if isinstance(expected, bool):
                ok = isinstance(value, bool)
            elif isinstance(expected, int):
                ok = _is_int(value)
            elif isinstance(expected, float):
                ok = _is_number(value)
            elif isinstance(expected, str):
                ok = isinstance(value, str)
            elif isinstance(expected, dict):
                ok = isinstance(value, dict)
            elif isinstance(expected, list):
                ok = isinstance(value, list)
            else:
                ok = value is None or isinstance(value, OPTIONAL_TYPES[(name, f.name)])
                ok = ok and not isinstance(value, bool)
            if not ok:
                problems.append(f"{name}.{f.name}: expected {type(expected).__name__}, got {value!r}")
                del clean[f.name]
            elif isinstance(expected, float):
                clean[f.name] = float(value)
        sections[name] = cls(**clean)
    cfg = RunConfig(**sections, source=source)
    problems.extend(_validate(cfg))
    if problems:
        where = f"{source}: " if source else ""
        raise ConfigError(f"{where}invalid configuration:\n  - " + "\n  - ".join(problems), problems)
    return cfg


def _validate(cfg):
    out = []
    p = cfg.params
    for key in ("mu_w", "g", "c"):
        if not getattr(p, key) > 0:
            out.append(f"params.{key} must be positive")
    for key in ("rho_w", "rho_m"):
        if not getattr(p, key) >= 0:
            out.append(f"params.{key} must be non-negative")
    if p.gamma < 0:
        out.append("params.gamma (surface tension) must be >= 0")
    if p.quadrature_order < 2:
        out.append("params.quadrature_order must be >= 2")
    try:
        model = model_from_dict(p.viscosity)
        if model.exact_admissible() is False:
            out.append(f"params.viscosity: model {model.to_dict()} violates the structural condition")
    except (TypeError, ValueError, KeyError) as exc:
        out.append(f"params.viscosity: {exc}")
    g = cfg.grid
    if g.Nx < 8 or g.Nx % 2:
        out.append("grid.Nx must be even and >= 8")
    for key in ("Ny_w", "Ny_m"):
        if getattr(g, key) < 5:
            out.append(f"grid.{key} must be >= 5")
    ini = cfg.initial
    if ini.shape not in (None, "cos", "sin"):
        out.append("initial.shape must be 'cos' or 'sin'")
    given = sum(x for x in (bool(ini.modes), ini.values is not None, ini.shape is not None))
    if given > 1:
        out.append("initial: give only one of modes, values or shape")
    if not any(str(problem).startswith("grid.") for problem in out):
        try:
            f0 = cfg.initial_profile()
            if f0.sup_norm() >= ADMISSIBLE_RADIUS:
                out.append(f"initial: sup-norm {f0.sup_norm():.4g} is not below 1/2")
            elif f0.sup_norm() >= cfg.solver.guard_f:
                out.append(f"initial: sup-norm {f0.sup_norm():.4g} is not below solver.guard_f")
        except (TypeError, ValueError, KeyError, IndexError) as exc:
            out.append(f"initial: {exc}")
    b = cfg.boundary
    if b.type not in ("constant", "sinusoids", "table"):
        out.append("boundary.type must be constant, sinusoids or table")
    if b.type == "sinusoids":
        for i, term in enumerate(b.terms):
            if not isinstance(term, dict) or "k" not in term or "amplitude" not in term:
                out.append(f"boundary.terms[{i}] needs 'k' and 'amplitude'")
                continue
            extra = set(term) - {"k", "amplitude", "omega", "phase", "shape"}
            if extra:
                out.append(f"boundary.terms[{i}]: unknown keys {sorted(extra)}")
    if b.type == "table":
        if len(b.times) < 1 or len(b.times) != len(b.profiles):
            out.append("boundary.times and boundary.profiles must be non-empty and of equal length")
        elif any(t1 <= t0 for t0, t1 in zip(b.times, b.times[1:])):
            out.append("boundary.times must increase strictly")
        elif b.times[-1] < cfg.time.t_end or b.times[0] > 0.0:
            out.append("boundary table must cover [0, time.t_end]")
    t = cfg.time
    if not t.t_end > 0:
        out.append("time.t_end must be positive")
    if not t.dt > 0:
        out.append("time.dt must be positive")
    if t.dt_max is not None and not t.dt_max > 0:
        out.append("time.dt_max must be positive")
    if t.scheme not in ("ifrk4", "rk4"):
        out.append("time.scheme must be 'ifrk4' or 'rk4'")
    s = cfg.solver
    for key in ("phi_tol", "mud_tol", "gmres_rtol", "guard_F"):
        if not getattr(s, key) > 0:
            out.append(f"solver.{key} must be positive")
    if not 0 < s.guard_f <= ADMISSIBLE_RADIUS:
        out.append("solver.guard_f must lie in (0, 1/2]")
    if s.max_newton < 1:
        out.append("solver.max_newton must be >= 1")
    if s.mud_method not in ("newton", "picard"):
        out.append("solver.mud_method must be 'newton' or 'picard'")
    o = cfg.output
    if o.snapshots < 1:
        out.append("output.snapshots must be >= 1")
    if o.restart_every < 0:
        out.append("output.restart_every must be >= 0")
    return out
