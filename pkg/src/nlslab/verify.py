"""Self-contained runtime check suites behind the ``verify`` subcommand.

Each suite re-derives a handful of quantities through an independent
route (quadrature against closed forms, dense grid scans against
analytic optimizers, exact ODE solutions against the stepper) and
reports pass/fail per check.  The suites are deliberately cheap: they
are smoke tests for an installed build, not the full pytest run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List

import numpy as np

from .bounds import (ab_weights, build_constants, d_of_t, g_fun, h_fun,
                     jr_lower, min_d, min_d_limit, min_d_weights, psi_fun)
from .cutoffs import (SpatialCutoff, TemporalCutoff, a_closed, a_quadrature,
                      b_closed, b_quadrature, compute_l1_norm, compute_mu,
                      eta_prime, make_spatial_cutoff, phi_eval)
from .exponents import ProblemParams, compute_exponents, select_case
from .numerics import golden_section_min, grid_max
from .solver import (ComplexField, Grid, InitialDataSpec, SolverSettings,
                     constant_field, evolve_fixed_steps, evolve_until_blowup,
                     linear_step, make_initial_data, nonlinear_step,
                     observables, strang_step)
from .weakform import (SpaceTimeCutoff, check_absorption_bound,
                       check_identity, check_inequality, eval_j_r_grid)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _check(results: List[CheckResult], name: str, passed, detail: str) -> None:
    results.append(CheckResult(name, bool(passed), detail))


_REFERENCE = dict(n=1, p=2.0, lambda_re=0.0, lambda_im=1.0, k=1.5)


# ---------------------------------------------------------------------------
# testfn: cutoff shapes and the closed-form time integrals


def suite_testfn() -> List[CheckResult]:
    out: List[CheckResult] = []

    spec = make_spatial_cutoff(nu=1.0, n=1)
    _check(out, "phi(0) == 1", phi_eval(spec, 0.0) == 1.0,
           f"phi(0) = {phi_eval(spec, 0.0)!r}")

    r = np.linspace(0.0, 30.0, 2000)
    for nu in (0.5, 1.0):
        sp = SpatialCutoff(nu=nu, n=2)
        vals = phi_eval(sp, r)
        lower = np.exp(-r ** nu)
        upper = math.e * lower
        ok = np.all(vals >= lower - 1e-15) and np.all(vals <= upper + 1e-15)
        _check(out, f"envelope e^-r^nu <= phi <= e*e^-r^nu (nu={nu})", ok,
               f"min slack {float(np.min(vals - lower)):.2e}")

    cases = [(2.0, 4.0, 0.0, 1.0), (1.5, 6.0, 0.25, 1.0), (3.0, 3.0, 0.5, 2.0)]
    l1 = compute_l1_norm(spec)
    worst_a = worst_b = 0.0
    for p, theta, s, t in cases:
        tc = TemporalCutoff(theta=theta, S=s, T=t)
        aq = a_quadrature(tc, p, spec)
        bq = b_quadrature(tc, p, spec)
        worst_a = max(worst_a, abs(a_closed(tc, p, l1) - aq) / aq)
        worst_b = max(worst_b, abs(b_closed(tc, p, l1) - bq) / bq)
    _check(out, "A(S,T) closed form == quadrature", worst_a < 1e-6,
           f"worst rel err {worst_a:.2e}")
    _check(out, "B(S,T) closed form == quadrature", worst_b < 1e-6,
           f"worst rel err {worst_b:.2e}")

    mu_a = compute_mu(spec, grid_points=4096)
    mu_b = compute_mu(spec, grid_points=8192)
    rel = abs(mu_a - mu_b) / mu_b
    _check(out, "mu stable under grid refinement", rel < 1e-2,
           f"rel change {rel:.2e}")

    tc = TemporalCutoff(theta=5.0, S=0.25, T=1.0)
    interior = -5.0 / 0.75
    got = eta_prime(tc, 0.25)
    _check(out, "eta' takes its right-limit at S", abs(got - interior) < 1e-12,
           f"eta'(S) = {got:.6f}")
    return out


# ---------------------------------------------------------------------------
# bounds: optimizer closed forms and the tangent construction


def suite_bounds() -> List[CheckResult]:
    out: List[CheckResult] = []

    worst = 0.0
    for sigma, omega in [(2.0, 0.5), (0.7, 0.25), (1.5, 0.6)]:
        closed = psi_fun(sigma, omega)
        _, brute = grid_max(lambda y: sigma * y ** omega - y, 0.0, 10.0)
        worst = max(worst, abs(closed - brute) / abs(closed))
    _check(out, "Psi closed form == grid max", worst < 1e-8,
           f"worst rel err {worst:.2e}")

    params = ProblemParams(**_REFERENCE)
    exps = compute_exponents(params)
    spec = make_spatial_cutoff(nu=1.0, n=1)
    consts = build_constants(params, spec, theta=20.0)

    t_min, d_min = min_d(consts, params.p)
    t_gold, d_gold = golden_section_min(lambda t: d_of_t(t, consts, params.p),
                                        1e-6, 1e6)
    rel = abs(d_min - d_gold) / d_gold
    _check(out, "min D closed form == golden section", rel < 1e-8,
           f"rel err {rel:.2e} (T_min {t_min:.4f} vs {t_gold:.4f})")

    a_hi, b_hi = ab_weights(1e6, params.p, consts.mu, consts.l1_norm)
    d_hi = min_d_weights(a_hi, b_hi, params.p)[1]
    limit = min_d_limit(consts.mu, consts.l1_norm, params.p)
    gap = abs(d_hi - limit) / limit
    _check(out, "min D approaches its theta->infinity limit", gap < 1e-3,
           f"rel gap {gap:.2e}")

    ok = True
    worst_eq = 0.0
    for tau in (2.0, 10.0, 100.0):
        g_val, r_tau = g_fun(tau, consts, exps)
        radii = np.geomspace(consts.R0 * 1.01, 1e3, 25)
        h_vals = np.array([h_fun(tau, r, consts, exps) for r in radii])
        ok = ok and bool(np.all(h_vals >= g_val * (1.0 - 1e-12)))
        worst_eq = max(worst_eq,
                       abs(h_fun(tau, r_tau, consts, exps) - g_val) / g_val)
    _check(out, "tangent line G stays below H", ok, "checked tau in {2,10,100}")
    _check(out, "H(R_tau) == G(tau)", worst_eq < 1e-8,
           f"worst rel err {worst_eq:.2e}")

    g1, _ = g_fun(4.0, consts, exps)
    g2, _ = g_fun(400.0, consts, exps)
    slope = (math.log(g2) - math.log(g1)) / (math.log(400.0) - math.log(4.0))
    _check(out, "log G slope equals kappa", abs(slope - exps.kappa) < 1e-10,
           f"slope {slope:.12f} vs kappa {exps.kappa:.12f}")

    pos = all(c > 0 for c in (consts.C_k, consts.C1, consts.C2,
                              consts.C3, consts.C4))
    _check(out, "constants C_k, C1..C4 positive", pos, f"C4 = {consts.C4:.6e}")
    return out


# ---------------------------------------------------------------------------
# solver: conservation, exact ODE blow-up, splitting consistency


def suite_solver() -> List[CheckResult]:
    out: List[CheckResult] = []

    grid = Grid(n=1, N=256, L=20.0)
    u0 = np.exp(-grid.radii ** 2).astype(np.complex128)
    u = u0.copy()
    for _ in range(2000):
        u = strang_step(u, grid, dt=0.01, lam=0.0, p=2.0)
    m0 = observables(u0, grid)[0]
    m1 = observables(u, grid)[0]
    drift = abs(m1 - m0) / m0
    _check(out, "linear flow conserves mass", drift < 1e-8,
           f"rel drift {drift:.2e} over 2000 steps")

    v = nonlinear_step(np.array([1.0 + 0.0j]), dt=0.01, lam=1j, p=2.0)
    exact = 1.0 / (1.0 - 0.01)
    err = abs(v[0] - exact)
    _check(out, "RK4 nonlinear step matches exact ODE", err < 1e-10,
           f"|err| = {err:.2e}")

    small = Grid(n=1, N=64, L=10.0)
    record, _ = evolve_until_blowup(
        constant_field(small, 1.0),
        SolverSettings(dt0=0.01, max_steps=200_000), lam=1j, p=2.0)
    rel = abs(record.T_detected - 1.0)
    _check(out, "constant field blows up at T = 1", rel < 0.02,
           f"T_detected = {record.T_detected:.4f}, reason {record.reason}")

    w_strang = strang_step(u0.copy(), grid, dt=0.01, lam=0.0, p=2.0)
    w_linear = linear_step(u0.copy(), grid, dt=0.01)
    gap = float(np.max(np.abs(w_strang - w_linear)))
    _check(out, "Strang step reduces to linear step at lambda = 0",
           gap < 1e-12, f"max gap {gap:.2e}")

    lam, p, t_end = 1.0 + 0.5j, 2.0, 0.1
    ref = evolve_fixed_steps(ComplexField(grid, u0.copy()),
                             dt=t_end / 512, n_steps=512, lam=lam, p=p)
    errs = []
    for steps in (16, 32):
        w = evolve_fixed_steps(ComplexField(grid, u0.copy()),
                               dt=t_end / steps, n_steps=steps, lam=lam, p=p)
        errs.append(float(np.max(np.abs(w.values - ref.values))))
    order = math.log2(errs[0] / errs[1])
    _check(out, "Strang splitting is second order", order > 1.9,
           f"observed order {order:.3f}")
    return out


# ---------------------------------------------------------------------------
# weakform: one short blow-up run against the integral identity


def suite_weakform() -> List[CheckResult]:
    out: List[CheckResult] = []

    params = ProblemParams(**_REFERENCE, epsilon=0.5)
    grid = Grid(n=1, N=1024, L=40.0)
    spec = InitialDataSpec(k=params.k, case=select_case(params))
    field = make_initial_data(spec, grid, params)
    # Snapshot density dominates the identity residual (trapezoid in t).
    settings = SolverSettings(dt0=0.0025, snapshot_stride=1, max_steps=400_000)
    record, traj = evolve_until_blowup(field, settings, lam=params.lam,
                                       p=params.p, epsilon=params.epsilon,
                                       data=spec)
    _check(out, "reference-style run reaches blow-up",
           record.reason != "CENSORED",
           f"T_detected = {record.T_detected:.4f} ({record.steps} steps)")

    spatial = make_spatial_cutoff(nu=1.0, n=1)
    horizon = 0.9 * traj.end_time()
    worst_resid = 0.0
    worst_slack = math.inf
    for R in (2.0, 5.0):
        temporal = TemporalCutoff(theta=20.0, S=0.25 * horizon / R ** 2,
                                  T=horizon / R ** 2)
        cutoff = SpaceTimeCutoff(spatial=spatial, temporal=temporal, R=R)
        worst_resid = max(worst_resid, check_identity(traj, cutoff))
        report = check_inequality(traj, cutoff)
        worst_slack = min(worst_slack, report.slack / report.rhs)
    _check(out, "weak-form identity residual small", worst_resid < 1e-2,
           f"worst relative residual {worst_resid:.2e}")
    _check(out, "Hoelder inequality slack nonnegative", worst_slack > -1e-3,
           f"worst slack/rhs {worst_slack:.2e}")

    consts = build_constants(params, spatial, theta=20.0)
    ok = True
    detail = ""
    for R in (2.0, 5.0):
        temporal = TemporalCutoff(theta=20.0, S=0.0, T=horizon / R ** 2)
        cutoff = SpaceTimeCutoff(spatial=spatial, temporal=temporal, R=R)
        j_grid = eval_j_r_grid(traj, cutoff)
        floor = jr_lower(R, traj.epsilon, consts)
        ok = ok and j_grid >= floor
        detail = f"J({R:g}) = {j_grid:.4e} vs floor {floor:.4e}"
    _check(out, "data pairing dominates its tail floor", ok, detail)

    absorb = check_absorption_bound(traj, spatial, theta=20.0,
                                    radii=(2.0, 4.0, 8.0))
    _check(out, "space-time mass absorbed by the source term",
           absorb.all_within, f"qs = {absorb.qs:.3f}")
    _check(out, "scaled space-time mass decays in R",
           absorb.decay_monotone,
           "scaled_decay " + ", ".join(f"{row.scaled_decay:.3e}"
                                       for row in absorb.rows))
    return out


SUITES: Dict[str, Callable[[], List[CheckResult]]] = {
    "testfn": suite_testfn,
    "bounds": suite_bounds,
    "solver": suite_solver,
    "weakform": suite_weakform,
}
