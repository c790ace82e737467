import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mudwater.config import parse_config
from mudwater.errors import AdmissibilityError, ConvergenceError
from mudwater.evolution import (BoundaryData, InterfaceProblem, ModelParams, SimState, Trajectory,
                                darcy_postprocess, dispersion_fit, evaluate_cF, linearized_symbols,
                                simulate, solve_Phi, step)
from mudwater.geometry import PeriodicProfile
from mudwater.rheology import EffectiveViscosity, Hectorite, Newtonian, Thickening

N = 16
X = 2 * np.pi * np.arange(N) / N


def params(**kw):
    base = dict(mu_w=1.0, rho_w=1.0, rho_m=1.2, g=1.0, gamma=0.1, ev=EffectiveViscosity(Newtonian(1.0)))
    base.update(kw)
    return ModelParams(**base)


@pytest.fixture(scope="module")
def stable_problem():
    return InterfaceProblem(params(), Nx=N, Ny_w=13, Ny_m=13)


@pytest.fixture(scope="module")
def hectorite_problem():
    return InterfaceProblem(params(ev=EffectiveViscosity(Hectorite(1.0, 1.0, 1.0))), Nx=N,
                            Ny_w=13, Ny_m=13)


# --- symbols ----------------------------------------------------------------


def test_symbol_values():
    p = params(gamma=0.0, rho_w=2.0, rho_m=3.0)
    m1, lam1 = linearized_symbols(1, p)
    t = math.tanh(1.0)
    assert m1 == pytest.approx(1.580026, abs=1e-6)
    assert m1 == pytest.approx(1 + t * t, rel=1e-15)
    # -tanh(1)/(1 + tanh(1)^2) evaluated with mpmath at 30 digits
    assert lam1 == pytest.approx(-0.48201379003790844, rel=1e-14)
    assert lam1 == pytest.approx(-0.482015, abs=2e-6)
    with pytest.raises(ValueError):
        linearized_symbols(0, p)


def test_symbol_uses_water_viscosity_in_denominator():
    p = params(mu_w=3.0, gamma=0.0, rho_w=2.0, rho_m=1.0)
    t = math.tanh(2.0)
    _, lam = linearized_symbols(2, p)
    assert lam == pytest.approx(2 * t * 1.0 / (1.0 + 3.0 * t * t), rel=1e-14)


@given(gamma=st.floats(0.01, 5.0), drho=st.floats(0.01, 2.0), mu_w=st.floats(0.1, 10.0),
       k=st.integers(1, 64))
def test_stable_parameters_give_negative_rates(gamma, drho, mu_w, k):
    p = params(gamma=gamma, rho_w=1.0, rho_m=1.0 + drho, mu_w=mu_w)
    assert p.stability_ok
    assert linearized_symbols(k, p)[1] < 0
    assert linearized_symbols(-k, p)[1] < 0


@given(gamma=st.floats(0.01, 1.0), drho=st.floats(0.01, 2.0))
def test_surface_tension_stabilises_short_waves(gamma, drho):
    p = params(gamma=gamma, rho_w=1.0 + drho, rho_m=1.0)
    k0 = math.ceil(math.sqrt(drho / gamma)) + 1
    assert all(linearized_symbols(k, p)[1] < 0 for k in range(k0, k0 + 20))


def test_stability_flag():
    assert params(gamma=0.0, rho_m=1.2).stability_ok
    assert params(gamma=0.1, rho_m=0.8).stability_ok
    assert not params(gamma=0.0, rho_m=0.8).stability_ok
    with pytest.raises(ValueError):
        params(gamma=-1.0)


def test_newtonian_consistency_with_classical_symbol():
    mu0, c = 2.5, 0.4
    p = params(ev=EffectiveViscosity(Newtonian(mu0), c=c), gamma=0.2)
    mu_m = 1.5 * c * mu0
    for k in (1, 2, 7):
        t = math.tanh(k)
        classical = k * t * (-0.2 - 0.2 * k * k) / (mu_m + t * t)
        assert linearized_symbols(k, p)[1] == pytest.approx(classical, rel=1e-13)


# --- residual and velocity ------------------------------------------------------


def test_flat_state_is_a_zero(hectorite_problem):
    h = PeriodicProfile.constant(0.37, N)
    z = PeriodicProfile.zeros(N)
    assert hectorite_problem.cF(h, z, z).sup_norm() < 1e-10


@pytest.mark.parametrize("k", [1, 2, 6])
def test_residual_is_multiplier_at_flat_state(k):
    p = params(gamma=0.0, rho_m=1.0)
    a = 1e-3
    r = evaluate_cF(PeriodicProfile.zeros(N), PeriodicProfile.zeros(N),
                    PeriodicProfile(a * np.cos(k * X)), p, Ny_w=13, Ny_m=13)
    m_k, _ = linearized_symbols(k, p)
    assert np.allclose(r.values, m_k * a * np.cos(k * X), atol=1e-12)


def test_residual_mean_vanishes():
    # the flux mean converges spectrally in Nx; 64 nodes resolve this amplitude
    pr = InterfaceProblem(params(ev=EffectiveViscosity(Hectorite(1.0, 1.0, 1.0))), Nx=64)
    x = 2 * np.pi * np.arange(64) / 64
    f = PeriodicProfile(0.2 * np.sin(x) + 0.1 * np.cos(3 * x))
    F = PeriodicProfile(0.3 * np.cos(2 * x))
    r = pr.cF(PeriodicProfile(0.1 + 0.05 * np.cos(x)), f, F)
    assert abs(r.mean) < 1e-8


def test_flat_velocity_is_zero(stable_problem):
    F, diag = stable_problem.solve_phi(PeriodicProfile.constant(1.0, N), PeriodicProfile.zeros(N))
    assert F.sup_norm() < 1e-12 and diag.residual_inf <= 1e-9


@pytest.mark.parametrize("k", [1, 3])
def test_small_mode_velocity_is_linear_rate(k):
    p = params()
    eps = 1e-5
    F, diag = solve_Phi(PeriodicProfile.zeros(N), PeriodicProfile(eps * np.cos(k * X)), p,
                        Ny_w=13, Ny_m=13)
    lam = linearized_symbols(k, p)[1]
    assert np.max(np.abs(F.values - lam * eps * np.cos(k * X))) <= 1e-2 * abs(lam) * eps
    assert abs(F.mean) < 1e-15


def test_translation_equivariance():
    # tight inner tolerances so that only round-off separates the two roots
    pr = InterfaceProblem(params(ev=EffectiveViscosity(Hectorite(1.0, 1.0, 1.0))), Nx=N,
                          Ny_w=13, Ny_m=13, mud_tol=1e-12, phi_tol=1e-11)
    h = PeriodicProfile.constant(0.2, N)
    f = PeriodicProfile(0.15 * np.cos(X) + 0.1 * np.sin(2 * X))
    F, _ = pr.solve_phi(h, f)
    G, _ = pr.solve_phi(h, f.roll(3))
    assert np.max(np.abs(G.values - F.roll(3).values)) < 1e-9


def test_parity(hectorite_problem):
    f = PeriodicProfile(0.15 * np.cos(X) + 0.05 * np.cos(3 * X))
    F, _ = hectorite_problem.solve_phi(PeriodicProfile.constant(0.0, N), f)
    assert np.max(np.abs(F.values - F.reflect().values)) < 1e-9


def test_uniqueness_probe_for_thickening():
    pr = InterfaceProblem(params(ev=EffectiveViscosity(Thickening())), Nx=N, Ny_w=13, Ny_m=13)
    f = PeriodicProfile(0.1 * np.sin(X) + 0.05 * np.cos(2 * X))
    F, diag = pr.solve_phi(PeriodicProfile.zeros(N), f, probe_uniqueness=True)
    assert diag.unique and diag.probe_distance <= 1e-8


def test_velocity_non_convergence_carries_history():
    pr = InterfaceProblem(params(ev=EffectiveViscosity(Hectorite())), Nx=N, Ny_w=9, Ny_m=9,
                          phi_tol=1e-30, max_newton=1)
    with pytest.raises(ConvergenceError) as info:
        pr.solve_phi(PeriodicProfile.zeros(N), PeriodicProfile(0.2 * np.cos(X)))
    assert len(info.value.history) == 2


# --- stepping ---------------------------------------------------------------


def const_h(value=0.0):
    prof = PeriodicProfile.constant(value, N)
    return lambda t, n: prof


@pytest.mark.parametrize("scheme", ["rk4", "ifrk4"])
def test_equilibrium_is_preserved(stable_problem, scheme):
    s = SimState(0.0, PeriodicProfile.zeros(N), PeriodicProfile.zeros(N), 0.1)
    for _ in range(5):
        s, _ = step(s, const_h(0.6), 0.1, scheme, stable_problem)
    assert s.f.sup_norm() <= 1e-12 and s.t == pytest.approx(0.5)


@pytest.mark.parametrize("scheme", ["rk4", "ifrk4"])
def test_single_step_amplification(scheme):
    # slow mode without surface tension so that explicit RK4 is accurate
    p = params(gamma=0.0)
    pr = InterfaceProblem(p, Nx=N, Ny_w=13, Ny_m=13)
    eps, dt, k = 1e-6, 0.1, 2
    f = PeriodicProfile(eps * np.cos(k * X))
    F, _ = pr.solve_phi(PeriodicProfile.zeros(N), f)
    s, info = step(SimState(0.0, f, F, dt), const_h(), dt, scheme, pr)
    lam = linearized_symbols(k, p)[1]
    ratio = s.f.mode(k) / f.mode(k)
    assert abs(ratio - math.exp(lam * dt)) < 1e-6
    assert info.residual_max <= 1e-9


def test_mean_is_invariant(hectorite_problem):
    f = PeriodicProfile(0.05 * np.cos(X) + 0.03 * np.sin(2 * X) + 0.01)
    F, _ = hectorite_problem.solve_phi(PeriodicProfile.zeros(N), f)
    s = SimState(0.0, f, F, 0.05)
    for _ in range(10):
        s, _ = step(s, const_h(), 0.05, "ifrk4", hectorite_problem)
    assert abs(s.f.mean - f.mean) <= 1e-12


def test_guard_breach_raises():
    pr = InterfaceProblem(params(gamma=0.0, rho_w=2.0, rho_m=1.0), Nx=N, Ny_w=9, Ny_m=9)
    f = PeriodicProfile(0.05 * np.cos(X))
    F, _ = pr.solve_phi(PeriodicProfile.zeros(N), f)
    with pytest.raises(AdmissibilityError) as info:
        step(SimState(0.0, f, F, 0.5), const_h(), 0.5, "ifrk4", pr, guard_f=0.051)
    assert info.value.sup_norm >= 0.051


def test_step_rejects_bad_inputs(stable_problem):
    s = SimState(0.0, PeriodicProfile.zeros(N), PeriodicProfile.zeros(N), 0.1)
    with pytest.raises(ValueError):
        step(s, const_h(), 0.0, "ifrk4", stable_problem)
    with pytest.raises(ValueError):
        step(s, const_h(), 0.1, "euler", stable_problem)


# --- simulate, fitting, post-processing -------------------------------------------


def small_config(**over):
    data = {"params": {"gamma": 0.1}, "grid": {"Nx": N, "Ny_w": 9, "Ny_m": 9},
            "time": {"t_end": 0.4, "dt": 0.1}}
    for key, value in over.items():
        data.setdefault(key, {}).update(value)
    return parse_config(data)


def test_flat_simulation():
    traj = simulate(small_config(boundary={"mean": 0.3}))
    assert traj.status == "completed"
    assert np.all(traj.sup_norms() <= 1e-12)
    assert np.all(np.diff(traj.times) > 0)


def test_stable_simulation_decays_monotonically():
    traj = simulate(small_config(initial={"shape": "cos", "k": 2, "amplitude": 1e-3}))
    sup = traj.sup_norms()
    assert np.all(np.diff(sup) < 0)
    assert all(d["unique"] is None for d in traj.diagnostics)


def test_unstable_simulation_hits_guard():
    cfg = small_config(params={"gamma": 0.0, "rho_w": 3.0, "rho_m": 1.0},
                       initial={"shape": "cos", "k": 1, "amplitude": 0.1},
                       time={"t_end": 50.0, "dt": 0.5, "adaptive": False})
    traj = simulate(cfg)
    assert traj.status == "guard_breach"
    assert "guard" in traj.message or "1/2" in traj.message
    assert traj.sup_norms()[-1] < 0.45


def test_adaptive_step_grows():
    cfg = small_config(initial={"shape": "cos", "k": 1, "amplitude": 1e-3},
                       time={"t_end": 1.2, "dt": 0.05, "dt_max": 0.2})
    traj = simulate(cfg)
    dts = [d["dt"] for d in traj.diagnostics[1:]]
    assert dts[0] == pytest.approx(0.05)
    assert max(dts) == pytest.approx(0.2) and traj.times[-1] == pytest.approx(1.2)


def test_dispersion_fit_exact_exponential_and_noise_floor():
    traj = Trajectory()
    for t in np.linspace(0.0, 2.0, 11):
        f = PeriodicProfile(1e-3 * math.exp(-0.7 * t) * np.cos(3 * X))
        traj.append(SimState(t, f, f, 0.2), {})
    assert dispersion_fit(traj, 3) == pytest.approx(-0.7, rel=1e-12)
    flat = Trajectory()
    for t in (0.0, 1.0):
        flat.append(SimState(t, PeriodicProfile.zeros(N), PeriodicProfile.zeros(N), 1.0), {})
    with pytest.raises(ValueError):
        dispersion_fit(flat, 1)
    with pytest.raises(ValueError):
        traj.append(SimState(0.5, f, f, 0.1), {})


def test_boundary_data_forms():
    assert BoundaryData("constant", mean=0.4)(3.0, N).values.tolist() == [0.4] * N
    sin = BoundaryData("sinusoids", mean=0.1, terms=[{"k": 2, "amplitude": 0.5, "omega": 1.0,
                                                      "shape": "sin"}])
    assert np.allclose(sin(0.5, N).values, 0.1 + 0.5 * math.cos(0.5) * np.sin(2 * X))
    tab = BoundaryData("table", times=[0.0, 1.0], profiles=[[0.0] * N, [1.0] * N])
    assert np.allclose(tab(0.25, N).values, 0.25)
    assert np.allclose(tab(5.0, N).values, 1.0)
    with pytest.raises(ValueError):
        BoundaryData("wavy")(0.0, N)


def test_darcy_postprocess_flat_state_is_hydrostatic():
    p = params()
    pr = InterfaceProblem(p, Nx=N, Ny_w=9, Ny_m=9)
    h = PeriodicProfile.constant(0.5, N)
    F, diag = pr.solve_phi(h, PeriodicProfile.zeros(N))
    state = SimState(0.0, PeriodicProfile.zeros(N), F, 0.1, v_w=diag.water.v_w, v_m=diag.mud.v_m)
    out = darcy_postprocess(state, p)
    for phase, rho in (("water", p.rho_w), ("mud", p.rho_m)):
        fields = out[phase]
        assert np.max(np.abs(fields.velocity[0])) < 1e-12
        assert np.max(np.abs(fields.velocity[1])) < 1e-12
        assert np.allclose(fields.pressure, 0.5 - p.g * rho * fields.Y, atol=1e-12)


def test_darcy_divergence_is_small_on_smooth_state():
    p = params(ev=EffectiveViscosity(Hectorite()))
    pr = InterfaceProblem(p, Nx=32, Ny_w=17, Ny_m=17)
    x = 2 * np.pi * np.arange(32) / 32
    f = PeriodicProfile(0.1 * np.cos(x))
    h = PeriodicProfile(0.2 * np.sin(x))
    F, diag = pr.solve_phi(h, f)
    state = SimState(0.0, f, F, 0.1, v_w=diag.water.v_w, v_m=diag.mud.v_m)
    out = darcy_postprocess(state, p)
    for phase in ("water", "mud"):
        div = out[phase].divergence[:, 1:-1]
        speed = np.max(np.abs(out[phase].velocity[1]))
        assert np.max(np.abs(div)) < 1e-7 * max(speed, 1.0)
    with pytest.raises(ValueError):
        darcy_postprocess(SimState(0.0, f, F, 0.1), p)


@settings(max_examples=5)
@given(st.integers(0, 2**31 - 1))
def test_interface_velocity_mean_zero_property(seed):
    rng = np.random.default_rng(seed)
    pr = InterfaceProblem(params(ev=EffectiveViscosity(Hectorite())), Nx=32, Ny_w=13, Ny_m=13)
    x = 2 * np.pi * np.arange(32) / 32
    a = rng.uniform(-0.1, 0.1, 3)
    f = PeriodicProfile(a[0] * np.cos(x) + a[1] * np.sin(2 * x) + a[2] * np.cos(3 * x))
    F, diag = pr.solve_phi(PeriodicProfile.constant(rng.uniform(-1, 1), 32), f)
    assert abs(F.mean) < 1e-14 and diag.residual_inf <= 1e-9
    # flux mean is a truncation effect at Nx=32 (4e-8 at worst here); it
    # vanishes spectrally with Nx, see the Nx=64 residual-mean test
    assert diag.mean_defect < 1e-6
