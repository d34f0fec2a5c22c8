import math

import numpy as np
import pytest

from nlslab.exponents import ProblemParams, select_case
from nlslab.solver import (ComplexField, DataConstructionError, Grid,
                           InitialDataSpec, REASON_AMPLITUDE, REASON_CENSORED,
                           REASON_L2, REASON_UNDERFLOW, SolverSettings,
                           constant_field, evolve_fixed_steps,
                           evolve_until_blowup, initial_profile, linear_step,
                           make_initial_data, nonlinear_step, observables,
                           profile_radial, strang_step)

from conftest import reference_params


# ---------------------------------------------------------------------------
# exact-ODE oracle
#
# For lam = i and real positive c the full equation with constant data
# reduces to du/dt = |u|^p (u stays real positive), whose solution
# blows up at T* = c^(1-p)/(p-1):


def ode_exact(c: float, p: float, t: float) -> float:
    return (c ** (1.0 - p) - (p - 1.0) * t) ** (-1.0 / (p - 1.0))


def ode_lifespan(c: float, p: float) -> float:
    return c ** (1.0 - p) / (p - 1.0)


# ---------------------------------------------------------------------------
# grid plumbing


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(n=3, N=128, L=10.0)
    with pytest.raises(ValueError):
        Grid(n=1, N=100, L=10.0)     # not a power of two
    with pytest.raises(ValueError):
        Grid(n=1, N=32, L=10.0)      # too small
    with pytest.raises(ValueError):
        Grid(n=1, N=128, L=0.0)


def test_grid_geometry():
    g = Grid(n=1, N=128, L=16.0)
    assert g.dx == 0.25
    assert g.axis[0] == -16.0
    assert g.axis[-1] == pytest.approx(16.0 - 0.25)
    # Boundary band: outermost five percent in sup norm.
    assert np.array_equal(g.boundary_mask, np.abs(g.axis) >= 0.95 * 16.0)
    assert g.boundary_mask.sum() > 0


def test_observables_constant_and_zero():
    g = Grid(n=1, N=256, L=10.0)
    mass, linf = observables(np.full(256, 2.0 + 0.0j), g)
    assert mass == pytest.approx(2.0 * math.sqrt(2.0 * 10.0), rel=1e-12)
    assert linf == 2.0
    mass0, linf0 = observables(np.zeros(256, dtype=complex), g)
    assert mass0 == 0.0 and linf0 == 0.0


def test_observables_gaussian():
    # Discrete mass of exp(-x^2) approximates (pi/2)^(1/4) on a wide box.
    g = Grid(n=1, N=2048, L=20.0)
    u = np.exp(-g.axis ** 2).astype(complex)
    mass, _ = observables(u, g)
    assert mass == pytest.approx((math.pi / 2.0) ** 0.25, rel=1e-10)


# ---------------------------------------------------------------------------
# stepping blocks


def test_linear_step_plane_wave():
    g = Grid(n=1, N=128, L=math.pi)
    xi = 2.0 * math.pi * 3 / (2.0 * g.L)          # an exact grid mode
    u0 = np.exp(1j * xi * g.axis)
    dt = 0.37
    u1 = linear_step(u0, g, dt)
    assert np.allclose(u1, np.exp(-1j * xi ** 2 * dt) * u0, atol=1e-12)


def test_linear_step_unitary_and_semigroup():
    g = Grid(n=1, N=256, L=10.0)
    rng = np.random.default_rng(0)
    u0 = rng.normal(size=256) + 1j * rng.normal(size=256)
    mass0, _ = observables(u0, g)
    u1 = linear_step(u0, g, 0.1)
    mass1, _ = observables(u1, g)
    assert mass1 == pytest.approx(mass0, rel=1e-13)
    two_half = linear_step(linear_step(u0, g, 0.05), g, 0.05)
    assert np.allclose(u1, two_half, atol=1e-13)


def test_nonlinear_step_zero_fixed_point():
    u = np.zeros(8, dtype=complex)
    assert np.array_equal(nonlinear_step(u, 0.01, 1j, 2.0), u)


def test_nonlinear_step_matches_exact_ode():
    u = np.array([1.0 + 0.0j])
    dt = 1e-3
    stepped = nonlinear_step(u, dt, 1j, 2.0)
    assert abs(stepped[0] - ode_exact(1.0, 2.0, dt)) < 1e-10


def test_nonlinear_step_modulus_flat_for_real_lambda():
    # lam = 1: d|u|^2/dt = 2 Re(-i |u|^p conj(u)) = 0 at u = 1, so the
    # modulus moves only at second order in dt.
    errs = []
    for dt in (1e-2, 5e-3, 2.5e-3):
        stepped = nonlinear_step(np.array([1.0 + 0.0j]), dt, 1.0, 2.0)
        errs.append(abs(abs(stepped[0]) - 1.0))
    rate = math.log(errs[0] / errs[2]) / math.log(4.0)
    assert rate > 1.9


def test_strang_reduces_to_linear_when_lambda_zero():
    g = Grid(n=1, N=128, L=10.0)
    rng = np.random.default_rng(1)
    u0 = rng.normal(size=128) + 1j * rng.normal(size=128)
    assert np.allclose(strang_step(u0, g, 0.05, 0.0, 2.0),
                       linear_step(u0, g, 0.05), atol=1e-14)


def test_free_evolution_conserves_mass_long_run():
    g = Grid(n=1, N=256, L=40.0)
    params = reference_params(epsilon=0.5)
    state = make_initial_data(InitialDataSpec(k=1.5, case=select_case(params)),
                              g, params)
    mass0, _ = observables(state.values, g)
    out = evolve_fixed_steps(state, dt=0.01, n_steps=10_000, lam=0.0, p=2.0)
    mass1, _ = observables(out.values, g)
    assert abs(mass1 - mass0) / mass0 < 1e-8


def test_constant_field_tracks_ode_to_near_blowup():
    # Spatially constant data reduces the PDE to the pointwise ODE; the
    # solver must track the exact solution to 1e-4 up to 0.9 T*.
    g = Grid(n=1, N=64, L=10.0)
    c, p = 1.0, 2.0
    t_end = 0.9 * ode_lifespan(c, p)
    steps = 2000
    out = evolve_fixed_steps(constant_field(g, c), t_end / steps, steps, 1j, p)
    exact = ode_exact(c, p, t_end)
    assert float(np.abs(out.values - exact).max()) < 1e-4


def test_strang_self_convergence_order():
    g = Grid(n=1, N=256, L=40.0)
    params = ProblemParams(n=1, p=2.0, lambda_re=1.0, lambda_im=0.5, k=1.5,
                           epsilon=0.5)
    u0 = make_initial_data(InitialDataSpec(k=1.5, case=select_case(params)),
                           g, params)
    t_end = 0.5
    ref = evolve_fixed_steps(ComplexField(g, u0.values.copy()),
                             t_end / 512, 512, params.lam, params.p)
    errs = []
    for steps in (16, 32, 64):
        out = evolve_fixed_steps(ComplexField(g, u0.values.copy()),
                                 t_end / steps, steps, params.lam, params.p)
        errs.append(float(np.abs(out.values - ref.values).max()))
    orders = [math.log(errs[i] / errs[i + 1]) / math.log(2.0)
              for i in range(len(errs) - 1)]
    assert min(orders) >= 1.9


# ---------------------------------------------------------------------------
# initial data


def test_profile_boundary_value():
    spec = InitialDataSpec(k=1.5, case=select_case(reference_params()))
    # 2^(k/2) (1+1)^(-k/2) = 1 exactly at |x| = 1.
    assert profile_radial(spec, 1.0) == pytest.approx(1.0, rel=1e-14)
    # Frozen interior comparison at |x| = 3: profile vs required tail.
    assert profile_radial(spec, 3.0) == pytest.approx(0.2990697562442441,
                                                      rel=1e-13)
    assert profile_radial(spec, 3.0) >= 3.0 ** -1.5   # 0.19245...


def test_initial_data_imaginary_coefficient():
    params = reference_params(epsilon=0.5)
    g = Grid(n=1, N=512, L=40.0)
    state = make_initial_data(InitialDataSpec(k=1.5, case=select_case(params)),
                              g, params)
    # lam = i selects the real part; the profile is real and positive.
    assert np.all(state.values.imag == 0.0)
    assert np.all(state.values.real > 0.0)
    outside = g.radii > 1.0
    assert np.all(state.values.real[outside] / 0.5
                  >= g.radii[outside] ** -1.5 * (1.0 - 1e-9))


def test_initial_data_real_coefficient():
    params = ProblemParams(n=1, p=2.0, lambda_re=1.0, lambda_im=0.0, k=1.5,
                           epsilon=1.0)
    g = Grid(n=1, N=512, L=40.0)
    f = initial_profile(InitialDataSpec(k=1.5, case=select_case(params)),
                        g, params)
    # lam1 > 0 places the profile in the (negative) imaginary part so
    # that -lam1 f2 dominates the required tail.
    assert np.all(f.real == 0.0)
    outside = g.radii > 1.0
    assert np.all(-f.imag[outside] >= g.radii[outside] ** -1.5 * (1.0 - 1e-9))


def test_initial_data_case_coefficient_mismatch():
    # A case tag built for real lam cannot be realized when the actual
    # coefficient has no real part.
    real_case = select_case(ProblemParams(n=1, p=2.0, lambda_re=1.0,
                                          lambda_im=0.0, k=1.5))
    g = Grid(n=1, N=128, L=10.0)
    with pytest.raises(DataConstructionError):
        initial_profile(InitialDataSpec(k=1.5, case=real_case), g,
                        reference_params())


def test_initial_data_norms_converge_under_refinement():
    params = reference_params(epsilon=1.0)
    spec = InitialDataSpec(k=1.5, case=select_case(params))
    masses, l1s = [], []
    for N in (512, 1024, 2048, 4096):
        g = Grid(n=1, N=N, L=40.0)
        f = initial_profile(spec, g, params)
        masses.append(observables(f, g)[0])
        l1s.append(float(g.integrate(np.abs(f))))
    gaps_m = [abs(b - a) for a, b in zip(masses, masses[1:])]
    gaps_1 = [abs(b - a) for a, b in zip(l1s, l1s[1:])]
    assert all(b < a for a, b in zip(gaps_m, gaps_m[1:]))
    assert all(b < a for a, b in zip(gaps_1, gaps_1[1:]))


def test_data_spec_validation():
    case = select_case(reference_params())
    with pytest.raises(ValueError):
        InitialDataSpec(k=0.0, case=case)
    with pytest.raises(ValueError):
        InitialDataSpec(k=1.5, case=case, amplitude_scale=0.5)


# ---------------------------------------------------------------------------
# blow-up detection


def test_constant_field_blowup_time():
    g = Grid(n=1, N=64, L=10.0)
    settings = SolverSettings(dt0=0.01)
    record, _ = evolve_until_blowup(constant_field(g, 1.0), settings, 1j, 2.0)
    assert not record.censored
    assert record.T_detected == pytest.approx(1.0, rel=0.02)
    # Constant data also fixes the detection reason: the L2 threshold
    # (1e3 x mass) fires before the amplitude threshold (1e6).
    assert record.reason == REASON_L2
    # A constant field bathes the boundary, so the guard must flag it.
    assert not record.boundary_clean


def test_constant_field_blowup_scaling_in_c():
    # T* = c^(1-p)/(p-1) halves when c doubles (p = 2).
    g = Grid(n=1, N=64, L=10.0)
    settings = SolverSettings(dt0=0.005)
    r1, _ = evolve_until_blowup(constant_field(g, 1.0), settings, 1j, 2.0)
    r2, _ = evolve_until_blowup(constant_field(g, 2.0), settings, 1j, 2.0)
    assert r2.T_detected / r1.T_detected == pytest.approx(0.5, rel=0.03)


def test_censored_free_run():
    g = Grid(n=1, N=128, L=40.0)
    params = reference_params(epsilon=0.5)
    state = make_initial_data(InitialDataSpec(k=1.5, case=select_case(params)),
                              g, params)
    settings = SolverSettings(dt0=0.01, max_steps=200)
    record, traj = evolve_until_blowup(state, settings, 0.0, 2.0)
    assert record.censored
    assert record.reason == REASON_CENSORED
    assert record.steps == 200
    assert record.T_detected == pytest.approx(2.0, rel=1e-12)


def test_amplitude_threshold_trigger():
    g = Grid(n=1, N=64, L=10.0)
    settings = SolverSettings(dt0=0.001, amp_threshold=5.0, mass_factor=1e12)
    record, _ = evolve_until_blowup(constant_field(g, 1.0), settings, 1j, 2.0)
    assert record.reason == REASON_AMPLITUDE
    assert record.sup_peak > 5.0


def test_step_underflow_trigger():
    g = Grid(n=1, N=64, L=10.0)
    # dt_min above dt0 forces the underflow branch immediately.
    settings = SolverSettings(dt0=0.01, dt_min=0.02)
    record, _ = evolve_until_blowup(constant_field(g, 1.0), settings, 1j, 2.0)
    assert record.reason == REASON_UNDERFLOW
    assert record.steps == 0


def test_snapshot_stride_controls_trajectory():
    g = Grid(n=1, N=64, L=10.0)
    settings = SolverSettings(dt0=0.01, snapshot_stride=5, max_steps=23)
    _, traj = evolve_until_blowup(constant_field(g, 0.1), settings, 1j, 2.0)
    # Initial state, every fifth step, and the final time.
    assert len(traj.times) == 1 + 4 + 1
    assert traj.times[0] == 0.0
    assert traj.end_time() == pytest.approx(0.23, rel=1e-12)
    none_settings = SolverSettings(dt0=0.01, snapshot_stride=0, max_steps=23)
    _, bare = evolve_until_blowup(constant_field(g, 0.1), none_settings,
                                  1j, 2.0)
    assert len(bare.times) == 1


def test_trajectory_interpolation():
    g = Grid(n=1, N=64, L=10.0)
    settings = SolverSettings(dt0=0.01, snapshot_stride=1, max_steps=50)
    _, traj = evolve_until_blowup(constant_field(g, 0.1), settings, 1j, 2.0)
    t_mid = 0.5 * (traj.times[3] + traj.times[4])
    mid = traj.field_at(t_mid)
    lo, hi = traj.fields[3], traj.fields[4]
    assert np.allclose(mid, 0.5 * (lo + hi))
    assert np.array_equal(traj.field_at(-1.0), traj.fields[0])
    assert np.array_equal(traj.field_at(1e9), traj.fields[-1])


def test_lifespan_monotone_in_epsilon():
    # Two-point ordering check; the full sweep invariant lives in the
    # acceptance suite.
    g = Grid(n=1, N=512, L=40.0)
    times = []
    for eps in (0.5, 0.25):
        params = reference_params(epsilon=eps)
        state = make_initial_data(
            InitialDataSpec(k=1.5, case=select_case(params)), g, params)
        record, _ = evolve_until_blowup(state, SolverSettings(dt0=0.01),
                                        1j, 2.0, epsilon=eps)
        assert not record.censored
        times.append(record.T_detected)
    assert times[1] > times[0]


def test_settings_validation():
    with pytest.raises(ValueError):
        SolverSettings(dt0=0.0)
    with pytest.raises(ValueError):
        SolverSettings(snapshot_stride=-1)
    with pytest.raises(ValueError):
        SolverSettings(max_steps=0)


def test_record_as_dict_round_trip():
    import json
    g = Grid(n=1, N=64, L=10.0)
    record, _ = evolve_until_blowup(constant_field(g, 1.0),
                                    SolverSettings(dt0=0.01), 1j, 2.0,
                                    epsilon=1.0)
    d = record.as_dict()
    assert d["reason"] == REASON_L2
    assert d["N"] == 64 and d["L"] == 10.0
    assert d["fft_threads"] == 1
    json.dumps(d)
