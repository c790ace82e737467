"""Fourier x Chebyshev collocation on the fixed water and mud strips."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .geometry import PeriodicProfile, grid_points

__all__ = ["Grid", "Field2D", "make_grid", "trace", "modal", "cheb", "fourier_diff_matrix"]

DOMAINS = {"water": (0.0, 1.0), "mud": (-1.0, 0.0)}


def cheb(n):
    """Chebyshev-Gauss-Lobatto nodes on [-1, 1] (increasing) and the first-derivative matrix."""
    N = n - 1
    j = np.arange(n)
    xi = np.cos(np.pi * j / N)
    c = np.where((j == 0) | (j == N), 2.0, 1.0) * (-1.0) ** j
    dx = xi[:, None] - xi[None, :]
    D = np.outer(c, 1.0 / c) / (dx + np.eye(n))
    D -= np.diag(D.sum(axis=1))
    return xi[::-1].copy(), D[::-1, ::-1].copy()


def fourier_diff_matrix(N, order):
    k = np.fft.fftfreq(N, 1.0 / N)
    sym = (1j * k) ** order
    if order % 2:
        sym[N // 2] = 0.0
    return np.real(np.fft.ifft(sym[:, None] * np.fft.fft(np.eye(N), axis=0), axis=0))


@dataclass(frozen=True, eq=False)
class Grid:
    Nx: int
    Ny: int
    domain: str
    x: np.ndarray
    y: np.ndarray
    Dx: np.ndarray
    Dxx: np.ndarray
    Dy: np.ndarray
    Dyy: np.ndarray

    @property
    def shape(self):
        return (self.Nx, self.Ny)

    @property
    def size(self):
        return self.Nx * self.Ny

    @property
    def interface_index(self):
        return 0 if self.domain == "water" else self.Ny - 1

    def edge_index(self, edge):
        if edge == "interface":
            return self.interface_index
        if edge == "top" and self.domain == "water":
            return self.Ny - 1
        if edge == "bottom" and self.domain == "mud":
            return 0
        raise ValueError(f"edge {edge!r} does not belong to the {self.domain} grid")

    @cached_property
    def X(self):
        return np.broadcast_to(self.x[:, None], self.shape)

    @cached_property
    def Y(self):
        return np.broadcast_to(self.y[None, :], self.shape)

    # Kronecker-product operators on the flattened (x-major) unknowns
    @cached_property
    def DX(self):
        return np.kron(self.Dx, np.eye(self.Ny))

    @cached_property
    def DXX(self):
        return np.kron(self.Dxx, np.eye(self.Ny))

    @cached_property
    def DY(self):
        return np.kron(np.eye(self.Nx), self.Dy)

    @cached_property
    def DYY(self):
        return np.kron(np.eye(self.Nx), self.Dyy)

    @cached_property
    def DXY(self):
        return np.kron(self.Dx, self.Dy)

    def rows(self, j):
        """Flat indices of the nodes on the y-level ``j``."""
        return np.arange(self.Nx) * self.Ny + j

    def field(self, values):
        return Field2D(self, values)

    def evaluate(self, func):
        return Field2D(self, func(self.X, self.Y))


def make_grid(Nx, Ny, domain):
    if Nx < 8 or Nx % 2:
        raise ValueError(f"Nx must be even and >= 8, got {Nx}")
    if Ny < 5:
        raise ValueError(f"Ny must be >= 5, got {Ny}")
    if domain not in DOMAINS:
        raise ValueError(f"domain must be one of {sorted(DOMAINS)}, got {domain!r}")
    a, b = DOMAINS[domain]
    xi, D = cheb(Ny)
    scale = 2.0 / (b - a)
    Dy = scale * D
    Dyy = Dy @ Dy
    # exact annihilation of constants limits round-off in the residuals
    np.fill_diagonal(Dyy, 0.0)
    np.fill_diagonal(Dyy, -Dyy.sum(axis=1))
    return Grid(
        Nx=Nx,
        Ny=Ny,
        domain=domain,
        x=grid_points(Nx),
        y=a + 0.5 * (b - a) * (xi + 1.0),
        Dx=fourier_diff_matrix(Nx, 1),
        Dxx=fourier_diff_matrix(Nx, 2),
        Dy=Dy,
        Dyy=Dyy,
    )


class Field2D:
    """Nodal values ``(Nx, Ny)`` of a scalar field on a :class:`Grid`."""

    __slots__ = ("grid", "values")

    def __init__(self, grid, values):
        values = np.array(np.broadcast_to(values, grid.shape), dtype=float)
        self.grid = grid
        self.values = values

    def like(self, values):
        return Field2D(self.grid, values)

    @property
    def flat(self):
        return self.values.ravel()

    def dx(self):
        return self.grid.Dx @ self.values

    def dxx(self):
        return self.grid.Dxx @ self.values

    def dy(self):
        return self.values @ self.grid.Dy.T

    def dyy(self):
        return self.values @ self.grid.Dyy.T

    def dxy(self):
        return self.grid.Dx @ self.values @ self.grid.Dy.T

    def trace(self, edge="interface"):
        return trace(self, edge)

    def is_finite(self):
        return bool(np.all(np.isfinite(self.values)))

    def to_csv(self, path):
        rows = np.column_stack([self.grid.X.ravel(), self.grid.Y.ravel(), self.flat])
        np.savetxt(path, rows, delimiter=",", header="x,y,value", comments="", fmt="%.17g")

    def to_json(self):
        return {"domain": self.grid.domain, "Nx": self.grid.Nx, "Ny": self.grid.Ny,
                "values": self.values.tolist()}

    def dumps(self):
        return json.dumps(self.to_json())

    def __repr__(self):
        return f"Field2D({self.grid.domain}, {self.grid.Nx}x{self.grid.Ny})"


def trace(field, edge="interface"):
    """Restriction of ``field`` to one of its horizontal edges."""
    j = field.grid.edge_index(edge)
    return PeriodicProfile(field.values[:, j])


def modal(obj, direction="analyze", N=None):
    """Discrete Fourier pair in x.

    ``analyze`` maps a profile, field or nodal array to rfft coefficients
    scaled by 1/N (per y-column for fields).  ``synthesize`` maps
    coefficients back to nodal values; ``N`` gives the node count.
    """
    if direction == "analyze":
        if isinstance(obj, PeriodicProfile):
            return obj.coeffs
        values = obj.values if isinstance(obj, Field2D) else np.asarray(obj, dtype=float)
        return np.fft.rfft(values, axis=0) / values.shape[0]
    if direction == "synthesize":
        coeffs = np.asarray(obj)
        if N is None:
            N = 2 * (coeffs.shape[0] - 1)
        return np.fft.irfft(coeffs * N, n=N, axis=0)
    raise ValueError(f"direction must be 'analyze' or 'synthesize', got {direction!r}")
