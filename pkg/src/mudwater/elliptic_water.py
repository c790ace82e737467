"""Transformed Laplacian on the water strip and the mixed problem for ``T(f)[F, h]``.

The water potential solves ``A_w(f) v = 0`` on ``S^1 x (0, 1)`` with the
flux condition ``B_w(f) v = F`` on the interface row and ``v = h`` on top.
"""

from __future__ import annotations

import logging
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
from scipy.linalg.lapack import dgecon

from .discretization import Field2D, make_grid
from .geometry import PeriodicProfile, diff_profile, map_coefficients

logger = logging.getLogger(__name__)

__all__ = ["WaterSolve", "WaterSolver", "water_coefficients", "apply_Aw", "boundary_Bw", "solve_T"]


def water_coefficients(f, y):
    """Coefficients of v_xx, v_xy, v_yy and v_y in ``A_w(f)``."""
    mc = map_coefficients(f, y)
    fv, fp, fpp, y, d = mc.f, mc.fp, mc.fpp, mc.y, mc.d
    q = y**2 - 1.0
    cxx = np.ones_like(d)
    cxy = 2.0 * fp * q / d
    cyy = fp**2 * q**2 / d**2 + 1.0 / d**2
    cy = fpp * q / d + 4.0 * fp**2 * y * q / d**2 + (2.0 * fv * fp**2 * q**2 + 2.0 * fv) / d**3
    return cxx, cxy, cyy, cy


def apply_Aw(f, v):
    """Pointwise value of the transformed Laplacian."""
    cxx, cxy, cyy, cy = water_coefficients(f, v.grid.y)
    return v.like(cxx * v.dxx() + cxy * v.dxy() + cyy * v.dyy() + cy * v.dy())


def boundary_Bw(f, v, mu_w=1.0):
    """``((1 + f'^2) v_y - f' v_x) / mu_w`` on the interface row."""
    j = v.grid.interface_index
    fp = diff_profile(f, 1).values
    vx = v.dx()[:, j]
    vy = v.dy()[:, j]
    return PeriodicProfile(((1.0 + fp**2) * vy - fp * vx) / mu_w)


@dataclass
class WaterSolve:
    v_w: Field2D
    residual_inf: float
    bc_residual_inf: float
    rcond: float


class WaterSolver:
    """Dense collocation solver for ``T(f)`` with an LU cache keyed by ``f``.

    Not safe to share between threads.
    """

    def __init__(self, grid, mu_w=1.0, cache_size=4):
        if grid.domain != "water":
            raise ValueError("WaterSolver needs a water grid")
        self.grid = grid
        self.mu_w = float(mu_w)
        self.cache_size = cache_size
        self._cache = OrderedDict()

    def operator_matrix(self, f):
        g = self.grid
        cxx, cxy, cyy, cy = (c.ravel()[:, None] for c in
                             np.broadcast_arrays(*water_coefficients(f, g.y)))
        return cxx * g.DXX + cxy * g.DXY + cyy * g.DYY + cy * g.DY

    def system_matrix(self, f):
        g = self.grid
        A = self.operator_matrix(f)
        fp = diff_profile(f, 1).values[:, None]
        bot = g.rows(g.interface_index)
        A[bot] = ((1.0 + fp**2) * g.DY[bot] - fp * g.DX[bot]) / self.mu_w
        top = g.rows(g.edge_index("top"))
        A[top] = 0.0
        A[top, top] = 1.0
        return A

    def _factor(self, f):
        key = f.values.tobytes()
        hit = self._cache.get(key)
        if hit is not None:
            self._cache.move_to_end(key)
            return hit
        A = self.system_matrix(f)
        lu, piv = la.lu_factor(A, check_finite=False)
        rcond = float(dgecon(lu, np.linalg.norm(A, 1), norm="1")[0])
        logger.debug("water system factored, rcond=%.3e", rcond)
        entry = (A, lu, piv, rcond)
        self._cache[key] = entry
        if len(self._cache) > self.cache_size:
            self._cache.popitem(last=False)
        return entry

    def solve(self, f, F, h):
        g = self.grid
        if f.N != g.Nx:
            raise ValueError("profile and grid resolutions differ")
        A, lu, piv, rcond = self._factor(f)
        if rcond < 1e-14:
            raise np.linalg.LinAlgError(f"water system numerically singular (rcond={rcond:.2e})")
        b = np.zeros(g.size)
        b[g.rows(g.interface_index)] = F.values
        b[g.rows(g.edge_index("top"))] = h.values
        x = la.lu_solve((lu, piv), b, check_finite=False)
        # one step of iterative refinement
        x += la.lu_solve((lu, piv), b - A @ x, check_finite=False)
        v = Field2D(g, x.reshape(g.shape))
        if not v.is_finite():
            raise FloatingPointError("water solve produced non-finite values")
        res = apply_Aw(f, v).values[:, 1:-1]
        bc = max(np.max(np.abs(boundary_Bw(f, v, self.mu_w).values - F.values)),
                 np.max(np.abs(v.values[:, -1] - h.values)))
        return WaterSolve(v, float(np.max(np.abs(res))), float(bc), rcond)


def solve_T(f, F, h, grid=None, mu_w=1.0, Ny=17):
    """Convenience wrapper building a one-off :class:`WaterSolver`."""
    if grid is None:
        grid = make_grid(f.N, Ny, "water")
    return WaterSolver(grid, mu_w).solve(f, F, h)
