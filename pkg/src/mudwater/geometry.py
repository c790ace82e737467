"""Periodic interface profiles and the flattening map of the two layers.

A profile is a real 2*pi-periodic function sampled at ``x_j = 2*pi*j/N``.
Modal coefficients follow the ``numpy.fft.rfft`` layout scaled by ``1/N``,
so ``cos(k x)`` has coefficient ``1/2`` at index ``k`` (``0 < k < N/2``).

The map ``phi_f(x, y) = (x, y + (1 - y^2) f(x))`` sends the fixed strips
``S^1 x (0, 1)`` and ``S^1 x (-1, 0)`` onto the water and mud regions
bounded by the interface ``y = f(x)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "PeriodicProfile",
    "AdmissibilityReport",
    "MapCoefficients",
    "validate_profile",
    "diff_profile",
    "curvature",
    "transform_point",
    "map_coefficients",
    "transformed_gradient",
    "normal_and_velocity",
    "resample",
]

ADMISSIBLE_RADIUS = 0.5


class PeriodicProfile:
    """Immutable nodal samples of a real periodic function."""

    __slots__ = ("_values",)

    def __init__(self, values):
        arr = np.array(values, dtype=float).ravel()
        if arr.size < 2 or arr.size % 2:
            raise ValueError(f"profile needs an even number of nodes, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("profile values must be finite")
        arr.flags.writeable = False
        self._values = arr

    # construction -----------------------------------------------------
    @classmethod
    def from_function(cls, func, N):
        return cls(func(grid_points(N)))

    @classmethod
    def zeros(cls, N):
        return cls(np.zeros(N))

    @classmethod
    def constant(cls, value, N):
        return cls(np.full(N, float(value)))

    @classmethod
    def from_coeffs(cls, coeffs, N):
        """Inverse of :attr:`coeffs` (rfft layout scaled by 1/N)."""
        return cls(np.fft.irfft(np.asarray(coeffs) * N, n=N))

    @classmethod
    def from_modes(cls, modes, N):
        """Build from ``{k: a_k}`` with ``f = sum a_k e^{ikx}``.

        Entries for ``-k`` that are not given are filled in by conjugate
        symmetry, so ``{1: 0.5}`` alone yields ``cos(x)``.  Values may be
        complex or ``[re, im]`` pairs.
        """
        x = grid_points(N)
        given = {}
        for k, a in modes.items():
            k = int(k)
            if isinstance(a, (list, tuple)):
                a = complex(a[0], a[1] if len(a) > 1 else 0.0)
            if abs(k) > N // 2:
                raise ValueError(f"mode {k} not representable on {N} nodes")
            given[k] = complex(a)
        out = np.zeros(N, dtype=complex)
        for k, a in given.items():
            out += a * np.exp(1j * k * x)
            if k != 0 and -k not in given:
                out += np.conj(a) * np.exp(-1j * k * x)
        return cls(out.real)

    # data access ------------------------------------------------------
    @property
    def values(self):
        return self._values

    @property
    def N(self):
        return self._values.size

    @property
    def x(self):
        return grid_points(self.N)

    @property
    def mean(self):
        return float(np.mean(self._values))

    @property
    def coeffs(self):
        return np.fft.rfft(self._values) / self.N

    def mode(self, k):
        """Complex coefficient ``a_k`` of ``e^{ikx}``."""
        c = self.coeffs[abs(k)]
        return np.conj(c) if k < 0 else c

    def sup_norm(self):
        return float(np.max(np.abs(self._values)))

    def __call__(self, x):
        """Trigonometric interpolant evaluated at arbitrary ``x``."""
        x = np.asarray(x, dtype=float)
        c = self.coeffs
        n2 = self.N // 2
        k = np.arange(1, n2)
        phase = np.exp(1j * np.multiply.outer(x, k))
        val = c[0].real + 2.0 * np.real(phase @ c[1:n2]) + c[n2].real * np.cos(n2 * x)
        return val

    # algebra ----------------------------------------------------------
    def _other(self, other):
        if isinstance(other, PeriodicProfile):
            if other.N != self.N:
                raise ValueError("profiles live on different grids")
            return other._values
        return other

    def __add__(self, other):
        return PeriodicProfile(self._values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return PeriodicProfile(self._values - self._other(other))

    def __rsub__(self, other):
        return PeriodicProfile(self._other(other) - self._values)

    def __mul__(self, other):
        return PeriodicProfile(self._values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return PeriodicProfile(self._values / self._other(other))

    def __neg__(self):
        return PeriodicProfile(-self._values)

    def __repr__(self):
        return f"PeriodicProfile(N={self.N}, mean={self.mean:.3g}, sup={self.sup_norm():.3g})"

    def derivative(self, order=1):
        return diff_profile(self, order)

    def project_mean_zero(self):
        return PeriodicProfile(self._values - self._values.mean())

    def roll(self, shift):
        """Shift by an integer number of grid cells, ``f(x - shift*h)``."""
        return PeriodicProfile(np.roll(self._values, shift))

    def reflect(self):
        """``f(-x)`` on the grid."""
        return PeriodicProfile(self._values[(-np.arange(self.N)) % self.N])

    # serialisation ----------------------------------------------------
    def to_json(self, modal=False):
        if not modal:
            return [float(v) for v in self._values]
        return {str(k): [float(c.real), float(c.imag)] for k, c in enumerate(self.coeffs)}

    @classmethod
    def from_json(cls, data, N=None):
        """Accept a list of nodal values or a ``{k: [re, im]}`` map."""
        if isinstance(data, dict):
            if N is None:
                raise ValueError("modal input needs the node count N")
            return cls.from_modes(data, N)
        prof = cls(data)
        if N is not None and prof.N != N:
            prof = resample(prof, N)
        return prof


def grid_points(N):
    return 2.0 * np.pi * np.arange(N) / N


def resample(f, M):
    """Trigonometric interpolation of ``f`` onto ``M`` nodes (``M`` even)."""
    N = f.N
    if M == N:
        return f
    c = f.coeffs
    out = np.zeros(M // 2 + 1, dtype=complex)
    if M > N:
        out[: N // 2] = c[: N // 2]
        # the coarse Nyquist cosine splits over +-N/2 on a finer grid
        out[N // 2] = 0.5 * c[N // 2].real
    else:
        out[: M // 2] = c[: M // 2]
        out[M // 2] = 2.0 * c[M // 2].real
    return PeriodicProfile(np.fft.irfft(out * M, n=M))


@dataclass
class AdmissibilityReport:
    sup_norm: float
    in_U: bool
    mean_zero: bool
    margin: float
    ok: bool


def validate_profile(f, require_mean_zero=True, tol=1e-12):
    sup = f.sup_norm()
    in_U = sup < ADMISSIBLE_RADIUS
    mean_zero = abs(f.mean) <= tol
    ok = in_U and (mean_zero or not require_mean_zero)
    return AdmissibilityReport(sup, in_U, mean_zero, ADMISSIBLE_RADIUS - sup, ok)


def _wavenumbers(N):
    return np.arange(N // 2 + 1)


def diff_profile(f, order=1):
    """Spectral derivative of order 1..4; the Nyquist mode is dropped for odd orders."""
    if order not in (1, 2, 3, 4):
        raise ValueError(f"derivative order must be 1..4, got {order}")
    N = f.N
    sym = (1j * _wavenumbers(N)) ** order
    if order % 2:
        sym[-1] = 0.0
    return PeriodicProfile(np.fft.irfft(np.fft.rfft(f.values) * sym, n=N))


def curvature(f, dealias=True):
    """``f'' / (1 + f'^2)^{3/2}``, evaluated on a grid of twice the size.

    Doubling (rather than the minimal 3/2 padding) keeps grid shifts
    integer on the fine grid, so the result commutes with :meth:`roll`.
    """
    N = f.N
    g = resample(f, _padded(N)) if dealias else f
    d1 = diff_profile(g, 1).values
    d2 = diff_profile(g, 2).values
    kappa = PeriodicProfile(d2 / (1.0 + d1**2) ** 1.5)
    return resample(kappa, N) if dealias else kappa


def _padded(N):
    return 2 * N


def _check_admissible(fx):
    if np.any(np.abs(fx) >= ADMISSIBLE_RADIUS):
        raise DomainError("interface leaves the admissible set |f| < 1/2")


def transform_point(f, x, y, direction="forward"):
    """Apply ``phi_f`` or its inverse to points ``(x, y)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    fx = f(x)
    if direction == "forward":
        return x, y + (1.0 - y**2) * fx
    if direction == "inverse":
        _check_admissible(fx)
        # conjugate form of (1 - sqrt(1 - 4 y f + 4 f^2)) / (2 f), regular at f = 0
        root = np.sqrt(1.0 - 4.0 * y * fx + 4.0 * fx**2)
        return x, 2.0 * (y - fx) / (1.0 + root)
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


@dataclass
class MapCoefficients:
    """Pointwise geometric factors of ``phi_f`` on a tensor grid.

    ``f``, ``fp``, ``fpp`` have shape ``(Nx, 1)``, ``y`` has shape ``(1, Ny)``;
    ``d = 1 - 2 y f``, ``c1 = f'(y^2 - 1)/d``, ``c2 = 1/d``.
    """

    f: np.ndarray
    fp: np.ndarray
    fpp: np.ndarray
    y: np.ndarray
    d: np.ndarray
    c1: np.ndarray
    c2: np.ndarray


def map_coefficients(f, y):
    fv = f.values[:, None]
    fp = diff_profile(f, 1).values[:, None]
    fpp = diff_profile(f, 2).values[:, None]
    y = np.asarray(y, dtype=float)[None, :]
    d = 1.0 - 2.0 * y * fv
    if np.any(d <= 0):
        raise DomainError("1 - 2 y f must stay positive; interface not admissible")
    return MapCoefficients(fv, fp, fpp, y, d, fp * (y**2 - 1.0) / d, 1.0 / d)


def transformed_gradient(f, v):
    """Physical gradient of ``v o phi_f^{-1}`` pulled back to the fixed grid."""
    mc = map_coefficients(f, v.grid.y)
    vx, vy = v.dx(), v.dy()
    return v.like(vx + mc.c1 * vy), v.like(mc.c2 * vy)


def normal_and_velocity(f, F):
    """Unit normal into the water and normal speed ``F/sqrt(1 + f'^2)``."""
    fp = diff_profile(f, 1).values
    w = np.sqrt(1.0 + fp**2)
    return (-fp / w, 1.0 / w), PeriodicProfile(F.values / w)
