import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mudwater.discretization import make_grid
from mudwater.elliptic_mud import (MudSolver, apply_Am, boundary_Bm, coefficients_a,
                                   flat_modal_solution, max_principle_check, solve_R)
from mudwater.elliptic_water import WaterSolver, apply_Aw, boundary_Bw, solve_T
from mudwater.errors import ConvergenceError
from mudwater.geometry import PeriodicProfile
from mudwater.rheology import EffectiveViscosity, Hectorite, Newtonian, Thickening

N = 16
X = 2 * np.pi * np.arange(N) / N
NEWTONIAN = EffectiveViscosity(Newtonian(1.0))
HECTORITE = EffectiveViscosity(Hectorite(1.0, 1.0, 1.0))


def smooth_u(X, Y):
    e = np.exp(0.7 * Y)
    s, c = np.sin(X), np.cos(X)
    u = 0.4 * s * e + 0.3 * c * Y**2 + 0.2 * Y
    grad = (0.4 * c * e - 0.3 * s * Y**2, 0.28 * s * e + 0.6 * c * Y + 0.2)
    hess = (-0.4 * s * e - 0.3 * c * Y**2, 0.28 * c * e - 0.6 * s * Y, 0.196 * s * e + 0.6 * c)
    return u, grad, hess


def pulled_back(f, grid):
    Y = grid.y[None, :] + (1 - grid.y[None, :] ** 2) * f.values[:, None]
    return smooth_u(grid.x[:, None], Y)


# --- water -----------------------------------------------------------------


def test_flat_manufactured_solution():
    g = make_grid(N, 17, "water")
    exact = g.evaluate(lambda X, Y: np.sin(X) * np.sinh(Y - 1))
    F = PeriodicProfile(np.sin(X) * np.cosh(-1.0))
    sol = solve_T(PeriodicProfile.zeros(N), F, PeriodicProfile.zeros(N), grid=g)
    assert np.max(np.abs(sol.v_w.values - exact.values)) < 1e-12
    assert sol.bc_residual_inf < 1e-12 and sol.rcond > 1e-8


@pytest.mark.parametrize("k", [1, 2, 5])
def test_flat_trace_symbol(k):
    # flux cos(kx) with zero top data leaves -mu_w tanh(k)/k cos(kx) on the interface
    mu_w = 1.7
    sol = solve_T(PeriodicProfile.zeros(N), PeriodicProfile(np.cos(k * X)), PeriodicProfile.zeros(N),
                  mu_w=mu_w)
    assert np.allclose(sol.v_w.trace().values, -mu_w * np.tanh(k) / k * np.cos(k * X), atol=1e-11)


def test_constant_top_data_gives_constant_potential():
    f = PeriodicProfile(0.3 * np.cos(X))
    sol = solve_T(f, PeriodicProfile.zeros(N), PeriodicProfile.constant(0.8, N))
    assert np.allclose(sol.v_w.values, 0.8, atol=1e-13)


def test_curved_harmonic_oracle():
    Nx = 48
    x = 2 * np.pi * np.arange(Nx) / Nx
    f = PeriodicProfile(0.25 * np.sin(x) + 0.05 * np.cos(2 * x))
    g = make_grid(Nx, 17, "water")

    def u(X, Y):
        return np.cos(X) * np.cosh(Y) + 0.2 * Y

    Y = g.y[None, :] + (1 - g.y[None, :] ** 2) * f.values[:, None]
    fp = f.derivative().values
    uX = -np.sin(x) * np.cosh(f.values)
    uY = np.cos(x) * np.sinh(f.values) + 0.2
    sol = solve_T(f, PeriodicProfile(uY - fp * uX), PeriodicProfile(u(x, 1.0)), grid=g)
    assert np.max(np.abs(sol.v_w.values - u(g.x[:, None], Y))) < 1e-9
    assert np.max(np.abs(boundary_Bw(f, sol.v_w).values - (uY - fp * uX))) < 1e-9


def test_water_operator_matches_physical_laplacian():
    f = PeriodicProfile.from_function(lambda x: 0.3 * np.cos(x) - 0.1 * np.sin(2 * x), 64)
    g = make_grid(64, 33, "water")
    u, _, hess = pulled_back(f, g)
    got = apply_Aw(f, g.field(u)).values
    want = hess[0] + hess[2]
    assert np.max(np.abs(got - want)) / np.max(np.abs(want)) < 1e-8


def test_water_solver_caches_and_rejects_wrong_grid():
    g = make_grid(N, 9, "water")
    solver = WaterSolver(g, cache_size=2)
    f = PeriodicProfile(0.1 * np.cos(X))
    for _ in range(3):
        solver.solve(f, PeriodicProfile.zeros(N), PeriodicProfile.zeros(N))
    assert len(solver._cache) == 1
    with pytest.raises(ValueError):
        WaterSolver(make_grid(N, 9, "mud"))
    with pytest.raises(ValueError):
        solver.solve(PeriodicProfile.zeros(8), PeriodicProfile.zeros(8), PeriodicProfile.zeros(8))


# --- mud -------------------------------------------------------------------


def test_flat_newtonian_closed_form():
    g = make_grid(N, 17, "mud")
    p = PeriodicProfile(np.cos(2 * X) - 0.3 * np.sin(5 * X))
    y = g.y[None, :]
    x = g.x[:, None]
    closed = (np.cos(2 * x) * np.cosh(2 * (y + 1)) / np.cosh(2)
              - 0.3 * np.sin(5 * x) * np.cosh(5 * (y + 1)) / np.cosh(5))
    sol = solve_R(PeriodicProfile.zeros(N), p, NEWTONIAN, grid=g)
    assert np.max(np.abs(sol.v_m.values - closed)) < 1e-10
    assert np.max(np.abs(flat_modal_solution(g, p).values - closed)) < 1e-13


def test_constant_pressure_is_reproduced_in_one_solve():
    sol = solve_R(PeriodicProfile(0.2 * np.cos(X)), PeriodicProfile.constant(0.4, N), HECTORITE)
    assert np.allclose(sol.v_m.values, 0.4, atol=1e-13)
    assert sol.iterations == 1


@pytest.mark.parametrize("k", [1, 3])
def test_flat_flux_symbol(k):
    ev = EffectiveViscosity(Newtonian(2.0))
    sol = solve_R(PeriodicProfile.zeros(N), PeriodicProfile(1e-3 * np.cos(k * X)), ev)
    flux = boundary_Bm(PeriodicProfile.zeros(N), sol.v_m, ev).values
    assert np.allclose(flux, 1e-3 * k * np.tanh(k) / 2.0 * np.cos(k * X), atol=1e-13)


def test_newton_and_picard_agree():
    f = PeriodicProfile(0.2 * np.cos(X) + 0.1 * np.sin(2 * X))
    p = PeriodicProfile(0.8 * np.cos(X))
    g = make_grid(N, 13, "mud")
    a = MudSolver(g, HECTORITE, method="newton").solve(f, p)
    b = MudSolver(g, HECTORITE, method="picard", max_iter=200).solve(f, p)
    assert a.converged and b.converged
    assert np.max(np.abs(a.v_m.values - b.v_m.values)) < 1e-9
    assert a.iterations < b.iterations


def test_nonlinear_solution_satisfies_operator_residual():
    f = PeriodicProfile(0.25 * np.sin(X))
    p = PeriodicProfile(np.cos(X) + 0.5 * np.cos(2 * X))
    sol = solve_R(f, p, HECTORITE)
    assert np.max(np.abs(apply_Am(f, sol.v_m, HECTORITE).values[:, :-1][:, 1:])) < 1e-8
    assert np.allclose(sol.v_m.trace().values, p.values, atol=1e-12)
    assert np.allclose(sol.v_m.dy()[:, 0], 0.0, atol=1e-9)


@pytest.mark.parametrize("ev", [NEWTONIAN, HECTORITE, EffectiveViscosity(Thickening())])
def test_mud_operator_matches_physical_operator(ev):
    f = PeriodicProfile.from_function(lambda x: 0.3 * np.sin(x) + 0.1 * np.cos(3 * x), 64)
    g = make_grid(64, 33, "mud")
    u, grad, hess = pulled_back(f, g)
    got = apply_Am(f, g.field(u), ev).values
    a11, a12, a22, _, _ = coefficients_a(ev, *grad)
    want = a11 * hess[0] + 2 * a12 * hess[1] + a22 * hess[2]
    assert np.max(np.abs(got - want)) / np.max(np.abs(want)) < 1e-8


def test_coefficient_eigenvalues():
    z1, z2 = np.array([0.3, 1.5]), np.array([-0.2, 2.0])
    a11, a12, a22, lam1, lam2 = coefficients_a(HECTORITE, z1, z2)
    for i in range(2):
        eig = np.linalg.eigvalsh([[a11[i], a12[i]], [a12[i], a22[i]]])
        assert np.allclose(sorted(eig), sorted([lam1[i], lam2[i]]), rtol=1e-12)
    assert np.all(lam2 > 0)


@given(st.lists(st.floats(-1.0, 1.0), min_size=3, max_size=3), st.floats(-0.3, 0.3))
def test_maximum_principle_property(amps, shift):
    f = PeriodicProfile(shift * np.sin(X))
    p = PeriodicProfile(amps[0] * np.cos(X) + amps[1] * np.sin(2 * X) + amps[2] * np.cos(3 * X))
    sol = solve_R(f, p, HECTORITE, Ny=9)
    rep = sol.max_principle
    assert rep.passed and rep.violation <= 1e-8


def test_max_principle_check_flags_interior_bump():
    g = make_grid(8, 7, "mud")
    v = g.evaluate(lambda X, Y: np.zeros_like(X + Y))
    v.values[3, 3] = 0.1
    rep = max_principle_check(v)
    assert not rep.passed and rep.violation == pytest.approx(0.1)


def test_mud_non_convergence_reports_history():
    solver = MudSolver(make_grid(N, 9, "mud"), HECTORITE, method="picard", max_iter=2, tol=1e-14)
    with pytest.raises(ConvergenceError) as info:
        solver.solve(PeriodicProfile(0.3 * np.cos(X)), PeriodicProfile(3 * np.cos(X)))
    assert len(info.value.history) >= 2
