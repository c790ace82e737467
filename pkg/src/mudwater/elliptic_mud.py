"""Quasilinear Darcy operator of the mud layer and the solver for ``R(f, p)``.

In physical variables the mud potential satisfies
``div(grad u / mu_m(|grad u|^2)) = a_ij(grad u) u_ij = 0``.  Pulled back
through ``phi_f`` this becomes ``b_ij v_ij + b v_y`` on ``S^1 x (-1, 0)``,
with Dirichlet data ``p`` on the interface and ``v_y = 0`` at the bottom.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .discretization import Field2D, make_grid
from .errors import ConvergenceError
from .geometry import PeriodicProfile, diff_profile, map_coefficients

logger = logging.getLogger(__name__)

__all__ = [
    "QuasilinearCoeffs",
    "MudSolve",
    "MaxPrincipleReport",
    "MudSolver",
    "coefficients_a",
    "transformed_coefficients",
    "quasilinear_coeffs",
    "apply_Am",
    "boundary_Bm",
    "flat_modal_solution",
    "solve_R",
    "max_principle_check",
]


def coefficients_a(ev, z1, z2):
    """``a_ij(z) = delta_ij/mu_m - 2 z_i z_j mu_m'/mu_m^2`` and its eigenvalues."""
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    r = z1**2 + z2**2
    mu, dmu = ev.evaluate(r)
    inv = 1.0 / mu
    w = 2.0 * dmu / mu**2
    a11 = inv - w * z1**2
    a12 = -w * z1 * z2
    a22 = inv - w * z2**2
    return a11, a12, a22, inv, inv - w * r


def transformed_coefficients(mc, a11, a12, a22):
    """Pull a constant-in-form operator ``a_ij d_i d_j`` back through ``phi_f``.

    Returns ``(b11, b12, b22, b)`` so that the operator reads
    ``b11 v_xx + 2 b12 v_xy + b22 v_yy + b v_y``.  The ``a22`` term of
    ``b22`` carries ``1/(1 - 2yf)^2``, as required by the chain rule.
    """
    fv, fp, fpp, y, d = mc.f, mc.fp, mc.fpp, mc.y, mc.d
    q = y**2 - 1.0
    b11 = a11
    b12 = fp * q / d * a11 + a12 / d
    b22 = fp**2 * q**2 / d**2 * a11 + 2.0 * fp * q / d**2 * a12 + a22 / d**2
    b = ((fpp * q / d + 4.0 * fp**2 * y * q / d**2 + 2.0 * fv * fp**2 * q**2 / d**3) * a11
         + (4.0 * fp * y - 4.0 * fv * fp * (1.0 + y**2)) / d**3 * a12
         + 2.0 * fv / d**3 * a22)
    return b11, b12, b22, b


@dataclass
class QuasilinearCoeffs:
    a11: Field2D
    a12: Field2D
    a22: Field2D
    b11: Field2D
    b12: Field2D
    b22: Field2D
    b: Field2D
    lam1: Field2D
    lam2: Field2D


def _coeff_arrays(mc, vx, vy, ev):
    z1 = vx + mc.c1 * vy
    z2 = mc.c2 * vy
    a11, a12, a22, lam1, lam2 = coefficients_a(ev, z1, z2)
    b11, b12, b22, b = transformed_coefficients(mc, a11, a12, a22)
    return (a11, a12, a22), (b11, b12, b22, b), (lam1, lam2)


def quasilinear_coeffs(f, v, ev):
    mc = map_coefficients(f, v.grid.y)
    a, bs, lam = _coeff_arrays(mc, v.dx(), v.dy(), ev)
    return QuasilinearCoeffs(*(v.like(c) for c in (*a, *bs, *lam)))


def apply_Am(f, v, ev):
    """Pointwise value of the transformed quasilinear operator."""
    mc = map_coefficients(f, v.grid.y)
    _, (b11, b12, b22, b), _ = _coeff_arrays(mc, v.dx(), v.dy(), ev)
    return v.like(b11 * v.dxx() + 2.0 * b12 * v.dxy() + b22 * v.dyy() + b * v.dy())


def boundary_Bm(f, v, ev):
    """Normal flux ``((1 + f'^2) v_y - f' v_x) / mu_m(|grad_f v|^2)`` on the interface."""
    j = v.grid.interface_index
    fp = diff_profile(f, 1).values
    vx = v.dx()[:, j]
    vy = v.dy()[:, j]
    mu, _ = ev.evaluate((vx - fp * vy) ** 2 + vy**2)
    return PeriodicProfile(((1.0 + fp**2) * vy - fp * vx) / mu)


def flat_modal_solution(grid, p):
    """Harmonic extension ``sum p_k cosh(k(y+1))/cosh(k) e^{ikx}`` below a flat interface."""
    c = p.coeffs
    k = np.arange(c.size)[:, None]
    y = grid.y[None, :]
    # cosh(k(y+1))/cosh(k) written with decaying exponentials
    prof = (np.exp(k * y) + np.exp(-k * (y + 2.0))) / (1.0 + np.exp(-2.0 * k))
    return Field2D(grid, np.fft.irfft(c[:, None] * prof * grid.Nx, n=grid.Nx, axis=0))


@dataclass
class MaxPrincipleReport:
    passed: bool
    violation: float


def max_principle_check(v, tol=1e-8):
    """Interior extrema must not exceed the extrema over the top and bottom rows."""
    vals = v.values
    edges = vals[:, [0, -1]]
    inner = vals[:, 1:-1]
    if inner.size == 0:
        return MaxPrincipleReport(True, 0.0)
    viol = max(0.0, inner.max() - edges.max(), edges.min() - inner.min())
    return MaxPrincipleReport(viol <= tol, float(viol))


@dataclass
class MudSolve:
    v_m: Field2D
    residual_inf: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list)
    max_principle: MaxPrincipleReport | None = None


class MudSolver:
    """Newton or Picard iteration for ``A_m(f, v) = 0`` with collocated boundary rows.

    The Newton Jacobian is the divergence-form linearisation
    ``div(a(grad u) grad w)``; its factorisation is reused for later solves
    at the same ``f`` (chord iteration) and rebuilt when convergence slows.
    Instances hold caches and are not thread-safe.
    """

    def __init__(self, grid, ev, tol=1e-9, max_iter=50, method="newton", step_tol=1e-13):
        if grid.domain != "mud":
            raise ValueError("MudSolver needs a mud grid")
        if method not in ("newton", "picard"):
            raise ValueError(f"method must be 'newton' or 'picard', got {method!r}")
        self.grid = grid
        self.ev = ev
        self.tol = tol
        self.max_iter = max_iter
        self.method = method
        self.step_tol = step_tol
        self._key = None
        self._lu = None

    def _residual(self, mc, V, p):
        g = self.grid
        vx = g.Dx @ V
        vy = V @ g.Dy.T
        a, (b11, b12, b22, b), lam = _coeff_arrays(mc, vx, vy, self.ev)
        R = b11 * (g.Dxx @ V) + 2.0 * b12 * (g.Dx @ vy) + b22 * (V @ g.Dyy.T) + b * vy
        R[:, -1] = V[:, -1] - p.values
        R[:, 0] = vy[:, 0]
        return R, a, (b11, b12, b22, b), lam

    def _matrix(self, mc, a, bs, newton):
        g = self.grid
        b11, b12, b22, b = (np.broadcast_to(c, g.shape) for c in bs)
        first_y = b
        first_x = None
        if newton and not self.ev.is_constant:
            a11, a12, a22 = a
            # divergence of the coefficient rows, in physical variables
            def ddX(c):
                return g.Dx @ c + mc.c1 * (c @ g.Dy.T)

            def ddY(c):
                return mc.c2 * (c @ g.Dy.T)

            d1 = ddX(a11) + ddY(a12)
            d2 = ddX(a12) + ddY(a22)
            first_x = d1
            first_y = b + d1 * mc.c1 + d2 * mc.c2
        col = lambda c: np.ravel(c)[:, None]  # noqa: E731
        A = col(b11) * g.DXX + col(2.0 * b12) * g.DXY + col(b22) * g.DYY + col(first_y) * g.DY
        if first_x is not None:
            A += col(first_x) * g.DX
        top = g.rows(g.Ny - 1)
        A[top] = 0.0
        A[top, top] = 1.0
        bot = g.rows(0)
        A[bot] = g.DY[bot]
        return A

    def _factor(self, mc, a, bs, newton, key):
        lu = la.lu_factor(self._matrix(mc, a, bs, newton), check_finite=False)
        if newton:
            self._key, self._lu = key, lu
        return lu

    def solve(self, f, p, guess=None):
        g = self.grid
        if f.N != g.Nx or p.N != g.Nx:
            raise ValueError("profile and grid resolutions differ")
        mc = map_coefficients(f, g.y)
        V = (guess.values.copy() if guess is not None
             else flat_modal_solution(g, p).values)
        scale = max(1.0, p.sup_norm())
        tol = self.tol * scale
        newton = self.method == "newton"
        key = f.values.tobytes()
        lu = self._lu if (newton and self._key == key) else None
        age = 1  # updates taken with the current factorisation; >0 means possibly stale

        R, a, bs, lam = self._residual(mc, V, p)
        rnorm = float(np.max(np.abs(R)))
        history = [rnorm]
        prev = np.inf
        last_step = np.inf
        solves = 0
        converged = False
        while solves < self.max_iter:
            if rnorm <= tol:
                small = last_step <= self.step_tol * max(scale, float(np.max(np.abs(V))))
                if small or rnorm > 0.5 * prev:
                    converged = True
                    break
            if lu is None or not newton or (age > 0 and rnorm > 1e-3 * prev):
                lu = self._factor(mc, a, bs, newton, key)
                age = 0
            dV = la.lu_solve(lu, -R.ravel(), check_finite=False).reshape(g.shape)
            solves += 1
            step = 1.0
            while True:
                Vn = V + step * dV
                Rn, an, bsn, lamn = self._residual(mc, Vn, p)
                rn = float(np.max(np.abs(Rn)))
                if rn <= max(rnorm, tol) or step < 1.0 / 64:
                    break
                if age > 0:
                    break
                step *= 0.5
            if rn > max(rnorm, tol) and age > 0:
                # the reused factorisation is too far off: rebuild at the current iterate
                lu = None
                continue
            prev, rnorm = rnorm, rn
            V, R, a, bs, lam = Vn, Rn, an, bsn, lamn
            history.append(rnorm)
            last_step = step * float(np.max(np.abs(dV)))
            age += 1
        if not converged:
            raise ConvergenceError(
                f"mud solve did not converge in {self.max_iter} iterations "
                f"(residual {history[-1]:.3e})", history)
        v = Field2D(g, V)
        if not v.is_finite():
            raise FloatingPointError("mud solve produced non-finite values")
        if np.min(lam[0]) <= 0 or np.min(lam[1]) <= 0:
            raise ConvergenceError("ellipticity lost: coefficient eigenvalue not positive", history)
        return MudSolve(v, rnorm, max(solves, 1), True, history, max_principle_check(v))


def solve_R(f, p, ev, guess=None, grid=None, Ny=17, **kwargs):
    """Convenience wrapper building a one-off :class:`MudSolver`."""
    if grid is None:
        grid = make_grid(f.N, Ny, "mud")
    return MudSolver(grid, ev, **kwargs).solve(f, p, guess)
