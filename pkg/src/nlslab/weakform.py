"""Weak-formulation checks along simulated trajectories.

Pairing a run with the rescaled cutoff compresses it into a handful of
scalars: the absorption integral I_R, the data pairing J_R and the two
Hoelder pieces K1, K2.  The checks below verify, by quadrature over the
stored snapshots, the integral identity every mild solution satisfies,
the inequality the lifespan chain starts from, and the uniform bound on
I_R that rules out global solutions for subcritical powers.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from .cutoffs import (QuadratureToleranceError, SpaceTimeCutoff,
                      SpatialCutoff, TemporalCutoff, a_closed, b_closed,
                      compute_l1_norm, compute_mu, eta_eval, eta_prime,
                      lap_ratio, laplacian_phi, phi_eval, phi_tail_mass,
                      surface_area)
from .exponents import CaseBranch
from .solver import InitialDataSpec, TrajectoryLog, jr_radial_density


class CoverageError(ValueError):
    """The trajectory does not cover the requested quadrature window."""


# ---------------------------------------------------------------------------
# quadrature plumbing


def _quad_nodes(traj: TrajectoryLog, t_lo: float, t_hi: float,
                kinks: Sequence[float] = ()) -> np.ndarray:
    """Snapshot times inside [t_lo, t_hi] plus endpoint and kink nodes."""
    end = traj.end_time()
    if t_hi > end + 1e-12 * max(1.0, end):
        raise CoverageError(
            f"window [{t_lo:.6g}, {t_hi:.6g}] runs past the last snapshot "
            f"at t = {end:.6g}")
    if not 0.0 <= t_lo < t_hi:
        raise ValueError(f"need 0 <= t_lo < t_hi, got ({t_lo!r}, {t_hi!r})")
    times = np.asarray(traj.times, dtype=float)
    inner = times[(times > t_lo) & (times < t_hi)]
    edges = [t_lo, t_hi] + [t for t in kinks if t_lo < t < t_hi]
    return np.unique(np.concatenate((inner, np.asarray(edges))))


def _selected_component(values: np.ndarray, branch: CaseBranch) -> np.ndarray:
    """Signed part of a complex field that enters the data pairing."""
    if branch is CaseBranch.LAMBDA1_POS:
        return -values.imag
    if branch is CaseBranch.LAMBDA1_NEG:
        return values.imag
    if branch is CaseBranch.LAMBDA2_POS:
        return values.real
    return -values.real


# ---------------------------------------------------------------------------
# the weak-form scalars


def eval_i_r(traj: TrajectoryLog, cutoff: SpaceTimeCutoff,
             lo: Optional[float] = None, hi: Optional[float] = None) -> float:
    """Absorption integral of |u|^p against the cutoff.

    lo and hi are rescaled times (the physical window is [lo R^2,
    hi R^2)); they default to 0 and the ramp end.  Trapezoid in time
    over stored snapshots, grid sum in space.
    """
    tc = cutoff.temporal
    lo = 0.0 if lo is None else lo
    hi = tc.T if hi is None else hi
    if not 0.0 <= lo < hi:
        raise ValueError(f"need 0 <= lo < hi, got ({lo!r}, {hi!r})")
    r2 = cutoff.R ** 2
    nodes = _quad_nodes(traj, lo * r2, hi * r2, kinks=(tc.S * r2,))
    phi_w = phi_eval(cutoff.spatial, traj.grid.radii / cutoff.R)
    half = traj.p / 2.0
    vals = np.empty(nodes.size)
    for i, t in enumerate(nodes):
        u = traj.field_at(t)
        dens = (u.real ** 2 + u.imag ** 2) ** half
        vals[i] = (float(traj.grid.integrate(dens * phi_w))
                   * eta_eval(tc, t / r2))
    return float(np.trapezoid(vals, nodes))


def eval_j_r(data: InitialDataSpec, epsilon: float, spatial: SpatialCutoff,
             R: float, lam: complex, lo: float = 0.0) -> float:
    """Data pairing: eps times the selected component of f against
    phi(|x|/R), by radial quadrature from radius lo outward.

    The default lo = 0 integrates over all of space; lo = box half
    width isolates the certified tail beyond the solver box.
    """
    if not R > 0:
        raise ValueError(f"R must be positive, got {R!r}")
    if epsilon == 0.0:
        return 0.0
    if not math.isfinite(epsilon):
        raise ValueError(f"epsilon must be finite, got {epsilon!r}")
    n = spatial.n
    area = surface_area(n)

    def integrand(r):
        return (r ** (n - 1) * jr_radial_density(data, lam, r)
                * phi_eval(spatial, r / R))

    val, err = integrate.quad(integrand, lo, np.inf,
                              epsabs=1e-13, epsrel=1e-11, limit=400)
    total = epsilon * area * val
    scaled_err = err * abs(epsilon) * area
    # Relative accuracy for O(1) pairings, absolute for tiny tails.
    if scaled_err > 1e-8 * abs(total) and scaled_err > 1e-12:
        raise QuadratureToleranceError("data pairing", total, err)
    return total


def eval_j_r_grid(traj: TrajectoryLog, cutoff: SpaceTimeCutoff) -> float:
    """Data pairing from the stored t = 0 field, truncated to the box.

    Shares the trajectory's own truncation so inequality checks see a
    consistent left side; the tail outside the box is certified
    separately via eval_j_r(..., lo=box half width).
    """
    if traj.data is None:
        raise ValueError("trajectory carries no initial-data spec")
    sel = _selected_component(traj.fields[0], traj.data.case.branch)
    phi_w = phi_eval(cutoff.spatial, traj.grid.radii / cutoff.R)
    return float(traj.grid.integrate(sel * phi_w))


# ---------------------------------------------------------------------------
# identity and inequality checks


def check_identity(traj: TrajectoryLog, cutoff: SpaceTimeCutoff,
                   f: Optional[np.ndarray] = None,
                   floor: float = 1e-30) -> float:
    """Relative residual of the weak identity over [0, T R^2].

    The left side pairs u with (-i d/dt + Laplacian) of the cutoff; the
    right side is i eps <f, phi_R> plus lam times the complex-weighted
    absorption integral.  Both sides share the box truncation and the
    snapshot trapezoid, so the residual measures solver and quadrature
    accuracy rather than tail mass.
    """
    grid = traj.grid
    tc = cutoff.temporal
    r2 = cutoff.R ** 2
    nodes = _quad_nodes(traj, 0.0, cutoff.support_end(), kinks=(tc.S * r2,))
    rs = grid.radii / cutoff.R
    phi_w = phi_eval(cutoff.spatial, rs)
    lap_w = laplacian_phi(cutoff.spatial, rs) / r2
    half = traj.p / 2.0
    lhs_vals = np.empty(nodes.size, dtype=np.complex128)
    abs_vals = np.empty(nodes.size)
    for i, t in enumerate(nodes):
        u = traj.field_at(t)
        eta = eta_eval(tc, t / r2)
        etap = eta_prime(tc, t / r2) / r2
        lhs_vals[i] = grid.integrate(u * (-1j * etap * phi_w + eta * lap_w))
        dens = (u.real ** 2 + u.imag ** 2) ** half
        abs_vals[i] = float(grid.integrate(dens * phi_w)) * eta
    lhs = complex(np.trapezoid(lhs_vals, nodes))
    if f is None:
        eps = traj.epsilon
        if eps and math.isfinite(eps):
            f = traj.fields[0] / eps
        elif eps == 0.0:
            f = np.zeros_like(traj.fields[0])
        else:
            raise ValueError("trajectory has no usable epsilon; supply f")
    rhs = (1j * traj.epsilon * complex(grid.integrate(f * phi_w))
           + traj.lam * complex(np.trapezoid(abs_vals, nodes)))
    return abs(lhs - rhs) / (abs(lhs) + abs(rhs) + floor)


@dataclass(frozen=True)
class WeakFormReport:
    """Both sides of the absorption inequality at one radius."""

    R: float
    S: float
    T: float
    I_R_0T: float
    I_R_ST: float
    J_R: float              # box-truncated, consistent with the run
    J_R_full: float         # radial quadrature over all of space
    K1: float
    K2: float
    A: float
    B: float
    lhs: float
    rhs: float
    slack: float
    identity_residual: float
    k1_bound: float
    k2_bound: float
    k1_ok: bool
    k2_ok: bool
    slack_ok: bool
    mu_attainment: float    # max |lap phi| / (mu phi) over the grid
    phi_tail_fraction: float  # cutoff mass outside the box, relative
    data_tail: float        # pairing mass outside the box (certified)

    def as_dict(self) -> dict:
        return asdict(self)


def check_inequality(traj: TrajectoryLog, cutoff: SpaceTimeCutoff,
                     tol: float = 1e-3) -> WeakFormReport:
    """Evaluate both sides of the absorption inequality at one radius.

    The window (S, T) comes from the cutoff's temporal part; physical
    coverage up to T R^2 is required.  For a genuine solution the slack
    rhs - lhs is nonnegative, so slack_ok tolerates only quadrature
    error (slack >= -tol * rhs); the Hoelder pieces K1, K2 are checked
    against their closed-form majorants the same way.
    """
    if traj.data is None:
        raise ValueError("trajectory carries no initial-data spec")
    if not math.isfinite(traj.epsilon):
        raise ValueError("trajectory has no recorded epsilon")
    grid = traj.grid
    if cutoff.spatial.n != grid.n:
        raise ValueError(f"cutoff dimension {cutoff.spatial.n} != "
                         f"grid dimension {grid.n}")
    tc = cutoff.temporal
    R = cutoff.R
    r2 = R * R
    p = traj.p
    lam_eff = traj.data.case.lambda_eff(traj.lam)
    if lam_eff == 0.0:
        raise ValueError("selected coefficient component vanishes")

    i_0t = eval_i_r(traj, cutoff)
    i_st = eval_i_r(traj, cutoff, lo=tc.S) if tc.S > 0 else i_0t
    j_grid = eval_j_r_grid(traj, cutoff)
    j_full = eval_j_r(traj.data, traj.epsilon, cutoff.spatial, R, traj.lam)

    nodes = _quad_nodes(traj, 0.0, cutoff.support_end(), kinks=(tc.S * r2,))
    rs = grid.radii / R
    phi_w = phi_eval(cutoff.spatial, rs)
    abs_lap_w = np.abs(laplacian_phi(cutoff.spatial, rs)) / r2
    k1_vals = np.empty(nodes.size)
    k2_vals = np.empty(nodes.size)
    for i, t in enumerate(nodes):
        u = traj.field_at(t)
        absu = np.abs(u)
        k1_vals[i] = (float(grid.integrate(absu * phi_w))
                      * abs(eta_prime(tc, t / r2)) / r2)
        k2_vals[i] = (float(grid.integrate(absu * abs_lap_w))
                      * eta_eval(tc, t / r2))
    k1 = float(np.trapezoid(k1_vals, nodes))
    k2 = float(np.trapezoid(k2_vals, nodes))

    mu = compute_mu(cutoff.spatial)
    l1 = compute_l1_norm(cutoff.spatial)
    a_val = a_closed(tc, p, l1)
    b_val = b_closed(tc, p, l1)
    q = p / (p - 1.0)
    s_pow = R ** (-2.0 + (2.0 + grid.n) / q)
    k1_bound = i_st ** (1.0 / p) * a_val * s_pow
    k2_bound = mu * i_0t ** (1.0 / p) * b_val * s_pow
    lhs = lam_eff * i_0t + j_grid
    rhs = k1_bound + k2_bound
    slack = rhs - lhs

    return WeakFormReport(
        R=R, S=tc.S, T=tc.T, I_R_0T=i_0t, I_R_ST=i_st,
        J_R=j_grid, J_R_full=j_full, K1=k1, K2=k2, A=a_val, B=b_val,
        lhs=lhs, rhs=rhs, slack=slack,
        identity_residual=check_identity(traj, cutoff),
        k1_bound=k1_bound, k2_bound=k2_bound,
        k1_ok=k1 <= k1_bound * (1.0 + tol),
        k2_ok=k2 <= k2_bound * (1.0 + tol),
        slack_ok=slack >= -tol * rhs,
        mu_attainment=float(np.abs(lap_ratio(cutoff.spatial, rs)).max()) / mu,
        phi_tail_fraction=phi_tail_mass(cutoff.spatial, grid.L / R) / l1,
        data_tail=eval_j_r(traj.data, traj.epsilon, cutoff.spatial, R,
                           traj.lam, lo=grid.L))


# ---------------------------------------------------------------------------
# uniform absorption bound


@dataclass(frozen=True)
class AbsorptionRow:
    """One radius of the uniform-bound family."""

    R: float
    T: float                # rescaled horizon, window / R^2
    I_0T: float
    implied_C: float        # ((A + mu B) / lambda_eff)^q
    bound: float            # implied_C * R^(qs)
    ratio: float            # I_0T / bound
    scaled_decay: float     # I_0T * R^(qs)
    within_bound: bool

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class AbsorptionReport:
    """Bound attainment and decay of I_R across a family of radii."""

    rows: Tuple[AbsorptionRow, ...]
    qs: float
    window: float           # shared physical horizon
    j_smallest_r: float     # pairing at the smallest radius (must be > 0)
    all_within: bool
    decay_monotone: bool    # scaled_decay nonincreasing in R

    def as_dict(self) -> dict:
        d = asdict(self)
        d["rows"] = [row.as_dict() for row in self.rows]
        return d


def check_absorption_bound(traj: TrajectoryLog, spatial: SpatialCutoff,
                           theta: float, radii: Sequence[float],
                           t_scale: float = 0.9,
                           tol: float = 1e-3) -> AbsorptionReport:
    """Uniform bound on the absorption integral over a family of radii.

    Every radius gets the rescaled horizon T = window / R^2, so the
    family shares one physical stretch [0, window] of the trajectory
    and a single R-independent temporal weight.  The chain constant
    ((A + mu B)/lambda_eff)^q then bounds I_R(0,T) by C R^(qs) at each
    radius.  scaled_decay = I_R R^(qs) carries the bound's own decay:
    it is expected nonincreasing for subcritical p (qs < 0) and a
    plateau at critical p (qs = 0).
    """
    if traj.data is None:
        raise ValueError("trajectory carries no initial-data spec")
    if not 0.0 < t_scale <= 1.0:
        raise ValueError(f"t_scale must lie in (0, 1], got {t_scale!r}")
    lam_eff = traj.data.case.lambda_eff(traj.lam)
    if lam_eff == 0.0:
        raise ValueError("selected coefficient component vanishes")
    p = traj.p
    q = p / (p - 1.0)
    qs = q * (-2.0 + (2.0 + spatial.n) / q)
    window = t_scale * traj.end_time()
    mu = compute_mu(spatial)
    l1 = compute_l1_norm(spatial)

    radii = sorted(float(R) for R in radii)
    j0 = eval_j_r(traj.data, traj.epsilon, spatial, radii[0], traj.lam)
    if not j0 > 0:
        raise ValueError(
            f"data pairing must be positive at R = {radii[0]}, got {j0!r}")

    rows = []
    for R in radii:
        tc = TemporalCutoff(theta=theta, S=0.0, T=window / R ** 2)
        cutoff = SpaceTimeCutoff(spatial=spatial, temporal=tc, R=R)
        i_0t = eval_i_r(traj, cutoff)
        d_val = a_closed(tc, p, l1) + mu * b_closed(tc, p, l1)
        implied_c = (d_val / lam_eff) ** q
        bound = implied_c * R ** qs
        rows.append(AbsorptionRow(
            R=R, T=tc.T, I_0T=i_0t, implied_C=implied_c, bound=bound,
            ratio=i_0t / bound, scaled_decay=i_0t * R ** qs,
            within_bound=i_0t <= bound * (1.0 + tol)))
    scaled = [row.scaled_decay for row in rows]
    monotone = all(later <= earlier * (1.0 + tol)
                   for earlier, later in zip(scaled, scaled[1:]))
    return AbsorptionReport(
        rows=tuple(rows), qs=qs, window=window, j_smallest_r=j0,
        all_within=all(row.within_bound for row in rows),
        decay_monotone=monotone)
