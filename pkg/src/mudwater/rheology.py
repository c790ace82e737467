"""Shear-dependent mud viscosity and its gap-averaged effective form.

Viscosities are functions of ``r``, the squared shear rate.  Every model
returns the pair ``(mu(r), mu'(r))`` with the derivative in closed form.
The effective viscosity

    mu_m(r) = ( int_{-1}^{1} s^2 / mu_t(r s^2) ds )^{-1},
    mu_t    = c * mu o [r -> r mu(r)^2]^{-1},

is what enters the nonlinear Darcy law of the mud layer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError

__all__ = [
    "ViscosityModel",
    "Newtonian",
    "Hectorite",
    "Thickening",
    "ConditionReport",
    "EffectiveViscosity",
    "eval_mu",
    "check_conditions",
    "invert_shear",
    "effective_viscosity",
    "check_effective_conditions",
    "model_from_dict",
]


class ViscosityModel:
    """Base class for viscosity laws ``r -> mu(r)``.

    Subclasses implement :meth:`evaluate` returning ``(mu, dmu)`` for an
    array of squared shear rates.  The derivative must be analytic.
    """

    name = "abstract"
    #: True when mu' vanishes identically (the mud problem is then linear)
    is_constant = False

    def evaluate(self, r):
        raise NotImplementedError

    def __call__(self, r):
        return self.evaluate(np.asarray(r, dtype=float))

    def bounds(self):
        """Known (inf, sup) of mu over [0, inf), or None if not available."""
        return None

    def exact_admissible(self):
        """Closed-form admissibility verdict, or None when only sampling applies."""
        return None

    def to_dict(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Newtonian(ViscosityModel):
    mu0: float = 1.0

    name = "newtonian"
    is_constant = True

    def __post_init__(self):
        if not self.mu0 > 0:
            raise ValueError(f"mu0 must be positive, got {self.mu0}")

    def evaluate(self, r):
        r = np.asarray(r, dtype=float)
        return np.full_like(r, self.mu0), np.zeros_like(r)

    def bounds(self):
        return self.mu0, self.mu0

    def to_dict(self):
        return {"model": self.name, "mu0": self.mu0}


@dataclass(frozen=True)
class Hectorite(ViscosityModel):
    """Bingham-type shear-thinning law ``mu_inf + tau0*beta/(1 + beta*r)``."""

    mu_inf: float = 1.0
    tau0: float = 1.0
    beta: float = 1.0

    name = "hectorite"

    def __post_init__(self):
        for key in ("mu_inf", "tau0", "beta"):
            if not getattr(self, key) > 0:
                raise ValueError(f"{key} must be positive, got {getattr(self, key)}")

    def evaluate(self, r):
        r = np.asarray(r, dtype=float)
        q = 1.0 + self.beta * r
        mu = self.mu_inf + self.tau0 * self.beta / q
        dmu = -self.tau0 * self.beta**2 / q**2
        return mu, dmu

    def bounds(self):
        return self.mu_inf, self.mu_inf + self.tau0 * self.beta

    def exact_admissible(self):
        return self.beta * self.tau0 < 4.0 * self.mu_inf

    def to_dict(self):
        return {"model": self.name, "mu_inf": self.mu_inf, "tau0": self.tau0, "beta": self.beta}


@dataclass(frozen=True)
class Thickening(ViscosityModel):
    """Bounded shear-thickening law rising from ``mu0`` at rest to ``mu_inf``.

    ``mu(r) = mu_inf - (mu_inf - mu0)/(1 + beta*r)``; mu' >= 0 everywhere
    and mu + 2 r mu' >= mu0, so the structural conditions always hold.
    """

    mu0: float = 1.0
    mu_inf: float = 2.0
    beta: float = 1.0

    name = "thickening"

    def __post_init__(self):
        if not (self.mu0 > 0 and self.beta > 0):
            raise ValueError("mu0 and beta must be positive")
        if self.mu_inf < self.mu0:
            raise ValueError("thickening requires mu_inf >= mu0")

    def evaluate(self, r):
        r = np.asarray(r, dtype=float)
        q = 1.0 + self.beta * r
        jump = self.mu_inf - self.mu0
        return self.mu_inf - jump / q, jump * self.beta / q**2

    def bounds(self):
        return self.mu0, self.mu_inf

    def to_dict(self):
        return {"model": self.name, "mu0": self.mu0, "mu_inf": self.mu_inf, "beta": self.beta}


_MODELS = {cls.name: cls for cls in (Newtonian, Hectorite, Thickening)}


def model_from_dict(data):
    """Build a viscosity model from ``{"model": name, **parameters}``."""
    data = dict(data)
    try:
        cls = _MODELS[data.pop("model")]
    except KeyError as exc:
        raise ValueError(f"unknown viscosity model {exc.args[0]!r}; choose from {sorted(_MODELS)}") from None
    return cls(**data)


def eval_mu(model, r):
    """Viscosity and its derivative at squared shear rate ``r >= 0``."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or not np.all(np.isfinite(r)):
        raise DomainError("squared shear rate must be finite and non-negative")
    return model.evaluate(r)


@dataclass
class ConditionReport:
    m_hat: float
    M_hat: float
    ok: bool
    worst_r: float
    exact_ok: bool | None = None

    def __str__(self):
        extra = "" if self.exact_ok is None else f" exact={self.exact_ok}"
        return (f"ok={self.ok} m_hat={self.m_hat:.6g} M_hat={self.M_hat:.6g} "
                f"worst_r={self.worst_r:.6g}{extra}")


def _sample_range(r_max, n):
    if not r_max > 0:
        raise ValueError(f"r_max must be positive, got {r_max}")
    if n < 2:
        raise ValueError(f"need at least two samples, got {n}")
    return np.linspace(0.0, float(r_max), int(n))


def _report(r, lower, upper, exact=None):
    lowest = np.minimum(lower, upper)
    i = int(np.argmin(lowest))
    m_hat = float(lowest[i])
    M_hat = float(np.max(np.maximum(lower, upper)))
    ok = m_hat > 0 and np.isfinite(M_hat)
    if exact is not None:
        ok = ok and exact
    return ConditionReport(m_hat=m_hat, M_hat=M_hat, ok=bool(ok), worst_r=float(r[i]), exact_ok=exact)


def check_conditions(model, r_max=100.0, n=2001):
    """Sample ``mu`` and ``mu + 2 r mu'`` on ``[0, r_max]``.

    For the Hectorite law the closed-form criterion ``beta*tau0 < 4*mu_inf``
    is applied on top of the sampled bounds.
    """
    r = _sample_range(r_max, n)
    mu, dmu = model.evaluate(r)
    return _report(r, mu, mu + 2.0 * r * dmu, model.exact_admissible())


def invert_shear(model, s, tol=1e-12, max_iter=200):
    """Solve ``r * mu(r)**2 = s`` for ``r`` (vectorised over ``s``).

    Safeguarded Newton iteration inside a bisection bracket.  The map is
    strictly increasing whenever ``mu + 2 r mu' > 0``.
    """
    s = np.asarray(s, dtype=float)
    if np.any(s < 0) or not np.all(np.isfinite(s)):
        raise DomainError("invert_shear needs finite s >= 0")
    if model.is_constant:
        mu0 = float(model.evaluate(0.0)[0])
        return s / mu0**2

    flat = s.ravel()
    mu_rest = float(model.evaluate(0.0)[0])
    lo = np.zeros_like(flat)
    hi = np.maximum(flat / mu_rest**2, 1.0)
    # grow the upper end until r mu^2(r) >= s
    for _ in range(200):
        mu_hi, _ = model.evaluate(hi)
        short = hi * mu_hi**2 < flat
        if not short.any():
            break
        hi = np.where(short, 2.0 * hi, hi)
    else:
        raise ConvergenceError("could not bracket the inverse shear map")

    r = flat / mu_rest**2
    r = np.clip(r, lo, hi)
    scale = tol * (1.0 + flat)
    history = []
    for _ in range(max_iter):
        mu, dmu = model.evaluate(r)
        g = r * mu**2 - flat
        res = np.abs(g)
        history.append(float(res.max(initial=0.0)))
        done = res <= scale
        if done.all():
            out = np.where(flat == 0.0, 0.0, r)
            return out.reshape(s.shape)
        lo = np.where(g < 0, r, lo)
        hi = np.where(g > 0, r, hi)
        slope = mu * (mu + 2.0 * r * dmu)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = r - g / slope
        bad = ~np.isfinite(step) | (step <= lo) | (step >= hi)
        r = np.where(done, r, np.where(bad, 0.5 * (lo + hi), step))
    raise ConvergenceError(f"inverse shear map did not converge, residual {history[-1]:.3e}", history)


@dataclass(frozen=True)
class EffectiveViscosity:
    """Width-averaged viscosity ``mu_m`` built on a base model.

    ``c`` scales the rest viscosity; the default 2/3 gives ``mu_m = mu0``
    for Newtonian mud.
    """

    base: ViscosityModel
    c: float = 2.0 / 3.0
    order: int = 64
    tol: float = 1e-12
    _nodes: np.ndarray = field(init=False, repr=False, compare=False)
    _weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("gap constant c must be positive")
        if self.order < 2:
            raise ValueError("quadrature order must be at least 2")
        x, w = np.polynomial.legendre.leggauss(self.order)
        # Gauss-Legendre on [0, 1]; the integrand is even in s
        object.__setattr__(self, "_nodes", 0.5 * (x + 1.0))
        object.__setattr__(self, "_weights", w)

    @property
    def is_constant(self):
        return self.base.is_constant

    def mu_tilde(self, sigma):
        """``c*mu`` composed with the inverse of ``r -> r mu^2``, and its derivative."""
        rho = invert_shear(self.base, sigma, tol=self.tol)
        mu, dmu = self.base.evaluate(rho)
        drho = 1.0 / (mu * (mu + 2.0 * rho * dmu))
        return self.c * mu, self.c * dmu * drho

    def evaluate(self, r):
        """Return ``(mu_m(r), mu_m'(r))`` for an array of ``r >= 0``."""
        r = np.asarray(r, dtype=float)
        if np.any(r < 0) or not np.all(np.isfinite(r)):
            raise DomainError("effective viscosity needs finite r >= 0")
        if self.base.is_constant:
            # integral of s^2/(c mu0) over [-1, 1]
            mu0 = float(self.base.evaluate(0.0)[0])
            return np.full_like(r, 1.5 * self.c * mu0), np.zeros_like(r)
        s2 = self._nodes**2
        sigma = r[..., None] * s2
        mt, dmt = self.mu_tilde(sigma)
        inv = np.sum(self._weights * s2 / mt, axis=-1)
        mu_m = 1.0 / inv
        dmu_m = mu_m**2 * np.sum(self._weights * s2**2 * dmt / mt**2, axis=-1)
        return mu_m, dmu_m

    def __call__(self, r):
        return self.evaluate(r)

    def rest(self):
        """``mu_m(0)``, the viscosity seen by the linearized problem."""
        return float(self.evaluate(0.0)[0])

    def quadrature_error(self, r):
        """Difference between this order and a doubled order at ``r``."""
        fine = EffectiveViscosity(self.base, self.c, 2 * self.order, self.tol)
        return np.abs(fine.evaluate(r)[0] - self.evaluate(r)[0])

    def to_dict(self):
        return {"viscosity": self.base.to_dict(), "c": self.c, "quadrature_order": self.order}


def effective_viscosity(ev, r, check_quadrature=False):
    """``(mu_m, mu_m')`` at ``r``; optionally verify quadrature convergence."""
    mu_m, dmu_m = ev.evaluate(r)
    if check_quadrature:
        err = ev.quadrature_error(r)
        if np.any(err > 1e-8 * np.abs(mu_m)):
            raise ConvergenceError(f"quadrature not converged, error {float(np.max(err)):.3e}")
    return mu_m, dmu_m


def check_effective_conditions(ev, r_max=100.0, n=401):
    """Sample ``mu_m`` and ``mu_m - 2 r mu_m'`` on ``[0, r_max]``."""
    r = _sample_range(r_max, n)
    mu_m, dmu_m = ev.evaluate(r)
    return _report(r, mu_m, mu_m - 2.0 * r * dmu_m)
