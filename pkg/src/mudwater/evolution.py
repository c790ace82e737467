"""Interface evolution: the nonlocal residual, the implicit velocity and time stepping.

For an interface ``f`` and top data ``h`` the interface velocity ``F``
solves the scalar nonlocal equation

    cF(h, f, F) = F + B_m(f, R(f, tr T(f)[-F, h] - gamma*kappa(f) + g*(rho_m - rho_w)*f)) = 0,

and the interface moves by ``df/dt = F``.  Near the flat state the
Jacobian in ``F`` is the multiplier ``m(k) = 1 + (mu_w/mu_m(0)) tanh(k)^2``,
which preconditions the Newton-Krylov solve, and the linear growth rates
are ``lambda_k``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from .discretization import make_grid
from .elliptic_mud import MudSolver, boundary_Bm
from .elliptic_water import WaterSolver
from .errors import AdmissibilityError, ConvergenceError, DomainError
from .geometry import PeriodicProfile, curvature, map_coefficients
from .rheology import EffectiveViscosity, Newtonian

logger = logging.getLogger(__name__)

__all__ = [
    "ModelParams",
    "SimState",
    "Trajectory",
    "InterfaceProblem",
    "linearized_symbols",
    "evaluate_cF",
    "solve_Phi",
    "step",
    "simulate",
    "dispersion_fit",
    "darcy_postprocess",
    "BoundaryData",
]


@dataclass
class ModelParams:
    mu_w: float = 1.0
    rho_w: float = 1.0
    rho_m: float = 1.2
    g: float = 1.0
    gamma: float = 0.0
    ev: EffectiveViscosity = field(default_factory=lambda: EffectiveViscosity(Newtonian(1.0)))

    def __post_init__(self):
        if not self.mu_w > 0:
            raise ValueError("mu_w must be positive")
        if self.gamma < 0:
            raise ValueError("surface tension must be non-negative")

    @property
    def stability_ok(self):
        """The flat state is linearly stable: surface tension or heavier mud."""
        return self.gamma > 0 or self.rho_m > self.rho_w

    @cached_property
    def mu_m0(self):
        return self.ev.rest()

    def to_dict(self):
        out = {"mu_w": self.mu_w, "rho_w": self.rho_w, "rho_m": self.rho_m,
               "g": self.g, "gamma": self.gamma}
        out.update(self.ev.to_dict())
        return out


def linearized_symbols(k, params):
    """``(m_k, lambda_k)`` of the flat-state linearisation for wavenumbers ``k != 0``."""
    k = np.asarray(k, dtype=float)
    if np.any(k == 0):
        raise ValueError("the mean mode k = 0 is excluded")
    t = np.tanh(np.abs(k))
    mu0 = params.mu_m0
    m_k = 1.0 + (params.mu_w / mu0) * t**2
    drive = params.g * (params.rho_w - params.rho_m) - k**2 * params.gamma
    lam = np.abs(k) * t / (mu0 + params.mu_w * t**2) * drive
    return m_k, lam


def _symbol_on_grid(N, params):
    """``m`` and ``lambda`` on the rfft wavenumbers 0..N/2 (zero at k = 0)."""
    k = np.arange(N // 2 + 1)
    m = np.ones(k.size)
    lam = np.zeros(k.size)
    m[1:], lam[1:] = linearized_symbols(k[1:], params)
    return m, lam


@dataclass
class BoundaryData:
    """Top boundary potential ``h(t, x)``.

    ``kind`` is ``constant`` (``mean``), ``sinusoids`` (``mean`` plus
    ``terms``: dicts with ``k``, ``amplitude``, optional ``omega``,
    ``phase`` and ``shape`` in {cos, sin}, amplitude ``A cos(omega t + phase)``)
    or ``table`` (``times`` and nodal ``profiles``, linear in time).
    """

    kind: str = "constant"
    mean: float = 0.0
    terms: list = field(default_factory=list)
    times: list = field(default_factory=list)
    profiles: list = field(default_factory=list)

    def is_constant(self):
        return self.kind == "constant" or (self.kind == "sinusoids" and not self.terms)

    def __call__(self, t, N):
        if self.kind == "constant":
            return PeriodicProfile.constant(self.mean, N)
        x = 2.0 * np.pi * np.arange(N) / N
        if self.kind == "sinusoids":
            vals = np.full(N, float(self.mean))
            for term in self.terms:
                amp = term["amplitude"] * math.cos(term.get("omega", 0.0) * t + term.get("phase", 0.0))
                wave = np.sin if term.get("shape", "cos") == "sin" else np.cos
                vals += amp * wave(term["k"] * x)
            return PeriodicProfile(vals)
        if self.kind == "table":
            times = np.asarray(self.times, dtype=float)
            table = np.asarray(self.profiles, dtype=float)
            if t <= times[0]:
                row = table[0]
            elif t >= times[-1]:
                row = table[-1]
            else:
                i = int(np.searchsorted(times, t)) - 1
                w = (t - times[i]) / (times[i + 1] - times[i])
                row = (1.0 - w) * table[i] + w * table[i + 1]
            prof = PeriodicProfile(row)
            if prof.N != N:
                from .geometry import resample
                prof = resample(prof, N)
            return prof
        raise ValueError(f"unknown boundary data kind {self.kind!r}")

    def to_dict(self):
        out = {"type": self.kind}
        if self.kind in ("constant", "sinusoids"):
            out["mean"] = self.mean
        if self.kind == "sinusoids":
            out["terms"] = self.terms
        if self.kind == "table":
            out["times"] = self.times
            out["profiles"] = self.profiles
        return out


@dataclass
class CFEvaluation:
    residual: PeriodicProfile
    p: PeriodicProfile
    water: object
    mud: object


@dataclass
class PhiDiagnostics:
    iterations: int
    residual_inf: float
    mean_defect: float
    history: list
    evaluations: int
    gmres_iterations: int
    mud_iterations_max: int
    max_principle_violation: float
    probe_distance: float | None = None
    unique: bool | None = None
    water: object = None
    mud: object = None


class InterfaceProblem:
    """Discretised water/mud pair for one parameter set.

    Holds the grids and solver caches; one instance per simulation.
    """

    def __init__(self, params, Nx=32, Ny_w=17, Ny_m=17, mud_tol=1e-9, mud_method="newton",
                 phi_tol=1e-9, max_newton=30, gmres_rtol=1e-10, probe_seed=0):
        self.params = params
        self.Nx = Nx
        self.water_grid = make_grid(Nx, Ny_w, "water")
        self.mud_grid = make_grid(Nx, Ny_m, "mud")
        self.water = WaterSolver(self.water_grid, params.mu_w)
        self.mud = MudSolver(self.mud_grid, params.ev, tol=mud_tol, method=mud_method)
        self.phi_tol = phi_tol
        self.max_newton = max_newton
        self.gmres_rtol = gmres_rtol
        self.probe_seed = probe_seed
        self.m_sym, self.lam_sym = _symbol_on_grid(Nx, params)
        self._mud_guess = None
        self.max_principle_worst = 0.0
        self.mud_solves = 0

    # ------------------------------------------------------------------
    def interface_pressure(self, f, trace_w):
        """Dirichlet data handed to the mud problem."""
        prm = self.params
        p = trace_w + prm.g * (prm.rho_m - prm.rho_w) * f
        if prm.gamma:
            p = p - prm.gamma * curvature(f)
        return p

    def evaluate(self, h, f, F, mud_guess=None):
        water = self.water.solve(f, -F, h)
        p = self.interface_pressure(f, water.v_w.trace("interface"))
        guess = mud_guess if mud_guess is not None else self._mud_guess
        mud = self.mud.solve(f, p, guess)
        self._mud_guess = mud.v_m
        self.mud_solves += 1
        self.max_principle_worst = max(self.max_principle_worst, mud.max_principle.violation)
        res = F + boundary_Bm(f, mud.v_m, self.params.ev)
        return CFEvaluation(res, p, water, mud)

    def cF(self, h, f, F):
        return self.evaluate(h, f, F).residual

    # ------------------------------------------------------------------
    def precondition(self, r):
        """Apply ``1/m(k)`` mode by mode; the mean passes unchanged."""
        N = self.Nx
        return np.fft.irfft(np.fft.rfft(r) / self.m_sym, n=N)

    def solve_phi(self, h, f, guess=None, probe_uniqueness=False, probe_seed=None, probe_count=3):
        F, diag = self._newton(h, f, guess)
        if probe_uniqueness:
            roots = [F]
            rng = np.random.default_rng(self.probe_seed if probe_seed is None else probe_seed)
            x = 2.0 * np.pi * np.arange(self.Nx) / self.Nx
            base = guess if guess is not None else PeriodicProfile.zeros(self.Nx)
            perturbations = [0.1 * np.cos(x)]
            for _ in range(probe_count - 1):
                w = np.fft.irfft(np.fft.rfft(rng.standard_normal(self.Nx)) *
                                 np.exp(-0.5 * np.arange(self.Nx // 2 + 1)), n=self.Nx)
                w -= w.mean()
                perturbations.append(0.1 * w / np.max(np.abs(w)))
            for pert in perturbations:
                other, _ = self._newton(h, f, base + pert)
                roots.append(other)
            dist = max(np.max(np.abs(a.values - b.values)) for i, a in enumerate(roots)
                       for b in roots[i + 1:])
            diag.probe_distance = float(dist)
            diag.unique = dist <= 1e-8 * max(1.0, F.sup_norm())
            if not diag.unique:
                logger.warning("uniqueness probe found distinct velocity roots (distance %.3e)", dist)
        return F, diag

    def _newton(self, h, f, guess):
        N = self.Nx
        F = (guess.project_mean_zero() if guess is not None else PeriodicProfile.zeros(N))
        evals = 0
        gmres_its = 0
        mud_its = 0
        viol = 0.0

        def run(Fp, mud_guess=None):
            nonlocal evals, mud_its, viol
            out = self.evaluate(h, f, Fp, mud_guess)
            evals += 1
            mud_its = max(mud_its, out.mud.iterations)
            viol = max(viol, out.mud.max_principle.violation)
            return out

        cur = run(F)
        r = cur.residual.values
        history = []
        for it in range(self.max_newton + 1):
            rp = r - r.mean()
            rnorm = float(np.max(np.abs(rp)))
            history.append(rnorm)
            if rnorm <= self.phi_tol:
                break
            if it == self.max_newton:
                raise ConvergenceError(
                    f"velocity solve did not converge in {self.max_newton} Newton steps "
                    f"(residual {rnorm:.3e})", history)
            base = r
            base_mud = cur.mud.v_m
            eps = 1e-7 * (1.0 + F.sup_norm())

            def matvec(v):
                v = np.ravel(v)
                vm = v.mean()
                v0 = v - vm
                nv = np.max(np.abs(v0))
                if nv == 0.0:
                    return np.full(N, vm)
                e = eps / nv
                r2 = run(F + PeriodicProfile(e * v0), base_mud).residual.values
                jv = (r2 - base) / e
                return jv - jv.mean() + vm

            counter = []
            J = LinearOperator((N, N), matvec=matvec, dtype=float)
            M = LinearOperator((N, N), matvec=lambda v: self.precondition(np.ravel(v)), dtype=float)
            delta, info = gmres(J, -rp, M=M, rtol=self.gmres_rtol, atol=0.1 * self.phi_tol,
                                restart=min(N, 40), maxiter=4,
                                callback=lambda _: counter.append(1), callback_type="pr_norm")
            gmres_its += len(counter)
            delta = delta - delta.mean()
            # backtracking on the residual norm
            lam = 1.0
            for _ in range(6):
                trial = PeriodicProfile(F.values + lam * delta)
                out = run(trial, base_mud)
                r_new = out.residual.values
                if np.max(np.abs(r_new - r_new.mean())) < rnorm or lam < 0.1:
                    break
                lam *= 0.5
            F, cur, r = trial, out, r_new
        diag = PhiDiagnostics(
            iterations=len(history) - 1,
            residual_inf=history[-1],
            mean_defect=float(abs(r.mean())),
            history=history,
            evaluations=evals,
            gmres_iterations=gmres_its,
            mud_iterations_max=mud_its,
            max_principle_violation=viol,
            water=cur.water,
            mud=cur.mud,
        )
        return F, diag


def evaluate_cF(h, f, F, params, problem=None, **grid):
    """Residual ``cF(h, f, F)``; builds a problem of matching resolution if needed."""
    if problem is None:
        problem = InterfaceProblem(params, Nx=f.N, **grid)
    return problem.cF(h, f, F)


def solve_Phi(h, f, params, guess=None, probe_uniqueness=False, problem=None, **grid):
    """Interface velocity ``F = Phi(h, f)`` and solver diagnostics."""
    if problem is None:
        problem = InterfaceProblem(params, Nx=f.N, **grid)
    return problem.solve_phi(h, f, guess, probe_uniqueness)


# ----------------------------------------------------------------------
# time stepping


@dataclass
class SimState:
    t: float
    f: PeriodicProfile
    F: PeriodicProfile
    dt: float
    steps: int = 0
    easy_steps: int = 0
    v_w: object = None
    v_m: object = None

    def to_json(self):
        out = {"t": self.t, "dt": self.dt, "steps": self.steps, "easy_steps": self.easy_steps,
               "f": self.f.to_json(), "F": self.F.to_json()}
        if self.v_w is not None:
            out["v_w"] = self.v_w.values.tolist()
        if self.v_m is not None:
            out["v_m"] = self.v_m.values.tolist()
        return out

    @classmethod
    def from_json(cls, data, problem=None):
        fields = {}
        if problem is not None:
            if "v_w" in data:
                fields["v_w"] = problem.water_grid.field(np.asarray(data["v_w"]))
            if "v_m" in data:
                fields["v_m"] = problem.mud_grid.field(np.asarray(data["v_m"]))
        return cls(t=float(data["t"]), f=PeriodicProfile(data["f"]), F=PeriodicProfile(data["F"]),
                   dt=float(data["dt"]), steps=int(data.get("steps", 0)),
                   easy_steps=int(data.get("easy_steps", 0)), **fields)


@dataclass
class StepInfo:
    newton_max: int
    residual_max: float
    mean_defect_max: float
    F_mean_max: float
    mud_iterations_max: int
    max_principle_violation: float
    unique: bool | None = None


def _apply_multiplier(values, sym):
    return np.fft.irfft(np.fft.rfft(values) * sym, n=values.size)


def _mean_zero(values, mean):
    return values - values.mean() + mean


def step(state, h_at, dt, scheme="ifrk4", problem=None, params=None, guard_f=0.45, guard_F=10.0,
         probe_uniqueness=False):
    """Advance one step of size ``dt``; returns ``(new_state, StepInfo)``.

    ``ifrk4`` integrates the ``lambda_k`` part exactly (Lawson integrating
    factor) and the remainder with classical RK4; ``rk4`` is fully explicit.
    """
    if problem is None:
        problem = InterfaceProblem(params, Nx=state.f.N)
    if dt <= 0:
        raise ValueError("dt must be positive")
    N = state.f.N
    mean0 = state.f.mean
    infos = []
    guess = [state.F]
    v_w = [state.v_w]
    v_m = [state.v_m]

    def phi(t, vals):
        f = PeriodicProfile(vals)
        if f.sup_norm() >= 0.5:
            raise AdmissibilityError(f"stage interface left |f| < 1/2 at t={t:.6g}", t, f.sup_norm())
        try:
            F, info = problem.solve_phi(h_at(t, N), f, guess[0], probe_uniqueness=probe_uniqueness)
        except DomainError as exc:
            raise AdmissibilityError(str(exc), t, f.sup_norm()) from exc
        guess[0] = F
        v_w[0], v_m[0] = info.water.v_w, info.mud.v_m
        infos.append((info, abs(F.mean)))
        return F.values

    t = state.t
    u = state.f.values
    if scheme == "rk4":
        k1 = phi(t, u)
        k2 = phi(t + dt / 2, _mean_zero(u + dt / 2 * k1, mean0))
        k3 = phi(t + dt / 2, _mean_zero(u + dt / 2 * k2, mean0))
        k4 = phi(t + dt, _mean_zero(u + dt * k3, mean0))
        new = u + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    elif scheme == "ifrk4":
        lam = problem.lam_sym
        E = np.exp(lam * dt / 2)

        def nonlin(tt, vals):
            return phi(tt, vals) - _apply_multiplier(vals, lam)

        a = nonlin(t, u)
        u1 = _mean_zero(_apply_multiplier(u + dt / 2 * a, E), mean0)
        b = nonlin(t + dt / 2, u1)
        u2 = _mean_zero(_apply_multiplier(u, E) + dt / 2 * b, mean0)
        c = nonlin(t + dt / 2, u2)
        u3 = _mean_zero(_apply_multiplier(u, E * E) + dt * _apply_multiplier(c, E), mean0)
        d = nonlin(t + dt, u3)
        new = (_apply_multiplier(u + dt / 6 * a, E * E)
               + dt / 3 * _apply_multiplier(b + c, E) + dt / 6 * d)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    new = _mean_zero(new, mean0)
    f_new = PeriodicProfile(new)
    F_new = guess[0]
    t_new = t + dt
    if f_new.sup_norm() >= guard_f:
        raise AdmissibilityError(
            f"interface sup-norm {f_new.sup_norm():.4g} reached the guard {guard_f} at t={t_new:.6g}",
            t_new, f_new.sup_norm())
    if F_new.sup_norm() >= guard_F:
        raise AdmissibilityError(
            f"velocity sup-norm {F_new.sup_norm():.4g} reached the guard {guard_F} at t={t_new:.6g}",
            t_new, f_new.sup_norm())
    uniq = [i.unique for i, _ in infos if i.unique is not None]
    info = StepInfo(
        newton_max=max(i.iterations for i, _ in infos),
        residual_max=max(i.residual_inf for i, _ in infos),
        mean_defect_max=max(i.mean_defect for i, _ in infos),
        F_mean_max=max(m for _, m in infos),
        mud_iterations_max=max(i.mud_iterations_max for i, _ in infos),
        max_principle_violation=max(i.max_principle_violation for i, _ in infos),
        unique=all(uniq) if uniq else None,
    )
    new_state = replace(state, t=t_new, f=f_new, F=F_new, steps=state.steps + 1,
                        v_w=v_w[0], v_m=v_m[0])
    return new_state, info


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    profiles: list = field(default_factory=list)
    velocities: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    status: str = "running"
    message: str = ""
    final_state: SimState | None = None

    def append(self, state, diag):
        if self.times and state.t <= self.times[-1]:
            raise ValueError("trajectory times must increase")
        self.times.append(state.t)
        self.profiles.append(state.f)
        self.velocities.append(state.F)
        self.diagnostics.append(diag)

    def amplitudes(self, k):
        return np.array([p.coeffs[k] for p in self.profiles])

    def sup_norms(self):
        return np.array([p.sup_norm() for p in self.profiles])

    def means(self):
        return np.array([p.mean for p in self.profiles])

    def __len__(self):
        return len(self.times)


DIAGNOSTIC_COLUMNS = ("t", "dt", "mean_drift", "f_sup", "F_sup", "F_mean", "newton_iterations",
                      "residual", "mean_defect", "mud_iterations", "max_principle_violation", "unique")


def simulate(config=None, problem=None, state=None, h_at=None, t_end=None, dt=None, scheme=None,
             progress=None):
    """Run from ``config`` (a :class:`~mudwater.config.RunConfig`) until ``t_end`` or a guard breach.

    ``state`` restarts from a saved :class:`SimState`.
    """
    if problem is None:
        problem = config.build_problem()
    if h_at is None:
        h_at = config.h
    t_end = config.time.t_end if t_end is None else t_end
    scheme = config.time.scheme if scheme is None else scheme
    dt_max = config.time.dt_max if config is not None else (dt or 0.01)
    adaptive = config.time.adaptive if config is not None else False
    sv = config.solver if config is not None else None
    guard_f = sv.guard_f if sv else 0.45
    guard_F = sv.guard_F if sv else 10.0
    probe = sv.probe_uniqueness if sv else False
    if state is None:
        f0 = config.initial_profile()
        dt0 = config.time.dt if dt is None else dt
        F0, info0 = problem.solve_phi(h_at(0.0, f0.N), f0, None, probe_uniqueness=probe)
        state = SimState(t=0.0, f=f0, F=F0, dt=dt0, v_w=info0.water.v_w, v_m=info0.mud.v_m)
        first = {"newton_iterations": info0.iterations, "residual": info0.residual_inf,
                 "mean_defect": info0.mean_defect, "mud_iterations": info0.mud_iterations_max,
                 "max_principle_violation": info0.max_principle_violation, "unique": info0.unique}
    else:
        first = {}
    mean0 = state.f.mean
    traj = Trajectory()
    traj.append(state, _diag_row(state, mean0, first))
    dt_cur = state.dt
    while state.t < t_end - 1e-12 * max(1.0, t_end):
        h_step = min(dt_cur, t_end - state.t)
        try:
            new, info = step(state, h_at, h_step, scheme, problem, guard_f=guard_f,
                             guard_F=guard_F, probe_uniqueness=probe)
        except AdmissibilityError as exc:
            traj.status = "guard_breach"
            traj.message = str(exc)
            logger.info("simulation stopped: %s", exc)
            break
        except ConvergenceError:
            if not adaptive or dt_cur < 1e-8:
                raise
            dt_cur *= 0.5
            logger.info("velocity solve failed; retrying with dt=%.3g", dt_cur)
            continue
        if adaptive:
            if info.newton_max > 15:
                dt_cur *= 0.5
                new.easy_steps = 0
            elif info.newton_max <= 5:
                new.easy_steps = state.easy_steps + 1
                if new.easy_steps >= 5 and dt_cur < dt_max:
                    dt_cur = min(2.0 * dt_cur, dt_max)
                    new.easy_steps = 0
            else:
                new.easy_steps = 0
        new.dt = dt_cur
        state = new
        traj.append(state, _diag_row(state, mean0, {
            "dt": h_step, "newton_iterations": info.newton_max, "residual": info.residual_max,
            "mean_defect": info.mean_defect_max, "F_mean": info.F_mean_max,
            "mud_iterations": info.mud_iterations_max,
            "max_principle_violation": info.max_principle_violation, "unique": info.unique}))
        if progress is not None:
            progress(state)
    else:
        traj.status = "completed"
    traj.final_state = state
    return traj


def _diag_row(state, mean0, extra):
    row = {"t": state.t, "dt": 0.0, "mean_drift": state.f.mean - mean0, "f_sup": state.f.sup_norm(),
           "F_sup": state.F.sup_norm(), "F_mean": abs(state.F.mean), "newton_iterations": 0,
           "residual": 0.0, "mean_defect": 0.0, "mud_iterations": 0,
           "max_principle_violation": 0.0, "unique": None}
    row.update(extra)
    return row


def dispersion_fit(traj, k, t_min=None, noise_floor=1e-13):
    """Least-squares slope of ``log|a_k(t)|``."""
    t = np.asarray(traj.times, dtype=float)
    amp = np.abs(traj.amplitudes(k))
    if t_min is not None:
        keep = t >= t_min
        t, amp = t[keep], amp[keep]
    if t.size < 2:
        raise ValueError("need at least two snapshots to fit a rate")
    if np.min(amp) <= noise_floor:
        raise ValueError(f"mode {k} amplitude {np.min(amp):.3e} is below the noise floor")
    slope, _ = np.polyfit(t, np.log(amp), 1)
    return float(slope)


# ----------------------------------------------------------------------
# physical fields


@dataclass
class PhaseFields:
    X: np.ndarray
    Y: np.ndarray
    velocity: tuple
    pressure: np.ndarray
    divergence: np.ndarray


def _physical(f, v, mu_of, rho, g):
    grid = v.grid
    mc = map_coefficients(f, grid.y)
    vx, vy = v.dx(), v.dy()
    u1 = vx + mc.c1 * vy
    u2 = mc.c2 * vy
    mu = mu_of(u1**2 + u2**2)
    w1, w2 = -u1 / mu, -u2 / mu
    Y = grid.Y + (1.0 - grid.Y**2) * mc.f

    def div(a, b):
        return grid.Dx @ a + mc.c1 * (a @ grid.Dy.T) + mc.c2 * (b @ grid.Dy.T)

    return PhaseFields(np.array(grid.X), Y, (w1, w2), v.values - g * rho * Y, div(w1, w2))


def darcy_postprocess(state, params):
    """Velocities, pressures and discrete divergence of both phases at ``state``."""
    if state.v_w is None or state.v_m is None:
        raise ValueError("state carries no cached potentials")
    water = _physical(state.f, state.v_w, lambda r: params.mu_w, params.rho_w, params.g)
    mud = _physical(state.f, state.v_m, lambda r: params.ev.evaluate(r)[0], params.rho_m, params.g)
    return {"water": water, "mud": mud}
