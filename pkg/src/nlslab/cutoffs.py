"""Space-time test functions and their calibrated constants.

The weak-form machinery needs a radial spatial cutoff phi with three
certified properties,

    phi(0) = 1,  0 < phi <= 1 decreasing,  |Lap(phi)| <= mu * phi,

and a temporal ramp eta that is 1 before S, a power-law descent on
[S, T], and 0 after T.  We use

    phi(r) = exp(1 - (1 + r^2)^(nu/2)),    nu in (0, 1],

which matches exp(-r^nu) up to a factor e for all radii, and

    eta(t) = (1 - (t - S)/(T - S))^theta on [S, T],   theta > 1/(p-1).

phi is pinned by phi(0) = 1; its integral is *not* normalized to one.
The L1 norm is computed once and carried through every constant that
assumes a unit-mass profile, so closed forms and quadratures stay
mutually consistent.

A(S, T) and B(S, T) are the two space-time weights produced by the
Hoelder step of the weak-form inequality; each has a closed form and an
adaptive-quadrature twin used as its oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate


class DivergentIntegralError(ValueError):
    """A cutoff integral diverges for the requested parameters."""


class QuadratureToleranceError(RuntimeError):
    """Adaptive quadrature failed to reach its tolerance."""

    def __init__(self, message: str, value: float, abserr: float):
        super().__init__(f"{message} (value={value!r}, abserr={abserr!r})")
        self.value = value
        self.abserr = abserr


def surface_area(n: int) -> float:
    """Area of the unit sphere in R^n (2 for n = 1, 2*pi for n = 2)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


# ---------------------------------------------------------------------------
# spatial cutoff


@dataclass
class SpatialCutoff:
    """Radial profile exp(1 - (1+r^2)^(nu/2)) in dimension n.

    mu and l1_norm are filled by make_spatial_cutoff and must be treated
    as frozen afterwards.
    """

    nu: float
    n: int
    mu: Optional[float] = None
    l1_norm: Optional[float] = None

    def __post_init__(self):
        if not 0.0 < self.nu <= 1.0:
            raise ValueError(f"nu must lie in (0, 1], got {self.nu!r}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")


def phi_eval(spec: SpatialCutoff, r):
    """phi at radius r (scalar or array), exact 1 at r = 0."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radius must be nonnegative")
    out = np.exp(1.0 - (1.0 + r * r) ** (spec.nu / 2.0))
    return out if out.shape else float(out)


def _shape_factors(nu: float, r: np.ndarray):
    """First and second derivatives of w(r) = (1+r^2)^(nu/2).

    Returns (w', w'', w'/r) with w'/r evaluated through its smooth
    analytic form nu*(1+r^2)^(nu/2-1), finite at r = 0.
    """
    base = 1.0 + r * r
    wp_over_r = nu * base ** (nu / 2.0 - 1.0)
    wp = r * wp_over_r
    wpp = nu * base ** (nu / 2.0 - 2.0) * (1.0 + (nu - 1.0) * r * r)
    return wp, wpp, wp_over_r


def lap_ratio(spec: SpatialCutoff, r: np.ndarray) -> np.ndarray:
    """Lap(phi)/phi at radius r, computed without forming phi.

    Avoids 0/0 in the far tail where phi underflows.
    """
    wp, wpp, wp_over_r = _shape_factors(spec.nu, r)
    return wp * wp - wpp - (spec.n - 1) * wp_over_r


def laplacian_phi(spec: SpatialCutoff, r):
    """Radial Laplacian phi''(r) + (n-1) phi'(r)/r, limit n*phi''(0) at 0."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radius must be nonnegative")
    out = lap_ratio(spec, r) * np.exp(1.0 - (1.0 + r * r) ** (spec.nu / 2.0))
    return out if out.shape else float(out)


_MU_GRID_LO, _MU_GRID_HI = 1e-6, 1e3


def compute_mu(spec: SpatialCutoff, grid_points: int = 4096,
               safety: float = 1.01) -> float:
    """Calibrate mu = safety * sup_r |Lap(phi)| / phi.

    The supremum is sampled on a log-spaced radial grid plus the exact
    r = 0 limit (n * nu).  Idempotent: a previously computed value is
    returned as is.
    """
    if spec.mu is not None:
        return spec.mu
    rs = np.concatenate(([0.0],
                         np.geomspace(_MU_GRID_LO, _MU_GRID_HI, grid_points)))
    ratios = np.abs(lap_ratio(spec, rs))
    if not np.all(np.isfinite(ratios)):
        raise ValueError("cutoff curvature ratio is not finite on the grid")
    mu = safety * float(ratios.max())
    spec.mu = mu
    return mu


def compute_l1_norm(spec: SpatialCutoff) -> float:
    """Integral of phi over R^n by radial quadrature (cached)."""
    if spec.l1_norm is not None:
        return spec.l1_norm
    n = spec.n
    val, err = integrate.quad(
        lambda r: r ** (n - 1) * math.exp(1.0 - (1.0 + r * r) ** (spec.nu / 2.0)),
        0.0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=200)
    total = surface_area(n) * val
    if err * surface_area(n) > 1e-9 * max(total, 1.0):
        raise QuadratureToleranceError("phi L1 norm", total, err)
    spec.l1_norm = total
    return total


def make_spatial_cutoff(nu: float, n: int) -> SpatialCutoff:
    """Construct a fully calibrated spatial cutoff (mu and L1 norm set)."""
    spec = SpatialCutoff(nu=nu, n=n)
    compute_mu(spec)
    compute_l1_norm(spec)
    return spec


def phi_tail_mass(spec: SpatialCutoff, radius: float) -> float:
    """Integral of phi over |x| >= radius; certifies box-truncation error."""
    n = spec.n
    val, _ = integrate.quad(
        lambda r: r ** (n - 1) * math.exp(1.0 - (1.0 + r * r) ** (spec.nu / 2.0)),
        radius, np.inf, epsabs=1e-14, epsrel=1e-10, limit=200)
    return surface_area(n) * val


# ---------------------------------------------------------------------------
# temporal cutoff


@dataclass(frozen=True)
class TemporalCutoff:
    """Descent ramp: 1 before S, (1 - (t-S)/(T-S))^theta on [S, T], 0 after."""

    theta: float
    S: float
    T: float

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError(f"theta must be positive, got {self.theta!r}")
        if not 0.0 <= self.S < self.T:
            raise ValueError(f"need 0 <= S < T, got S={self.S!r}, T={self.T!r}")


def eta_eval(tc: TemporalCutoff, t):
    """eta at time t (scalar or array)."""
    t = np.asarray(t, dtype=float)
    frac = np.clip((t - tc.S) / (tc.T - tc.S), 0.0, 1.0)
    out = (1.0 - frac) ** tc.theta
    return out if out.shape else float(out)


def eta_prime(tc: TemporalCutoff, t):
    """d(eta)/dt, with the right-hand limit used at t = S.

    The derivative jumps at S; quadrature nodes placed exactly at S get
    the interior value so trapezoid sums converge to the open-interval
    integral.
    """
    t = np.asarray(t, dtype=float)
    inside = (t >= tc.S) & (t < tc.T)
    frac = np.where(inside, (t - tc.S) / (tc.T - tc.S), 0.0)
    val = -tc.theta / (tc.T - tc.S) * (1.0 - frac) ** (tc.theta - 1.0)
    out = np.where(inside, val, 0.0)
    return out if out.shape else float(out)


# ---------------------------------------------------------------------------
# combined cutoff


@dataclass(frozen=True)
class SpaceTimeCutoff:
    """psi_R(t, x) = eta(t / R^2) * phi(|x| / R)."""

    spatial: SpatialCutoff
    temporal: TemporalCutoff
    R: float

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError(f"R must be positive, got {self.R!r}")

    def psi(self, t: float, r):
        """Value at physical time t and physical radius r."""
        return (eta_eval(self.temporal, t / self.R ** 2)
                * phi_eval(self.spatial, np.asarray(r) / self.R))

    def dt_psi(self, t: float, r):
        """Time derivative; scale factor R^-2 from the argument t/R^2."""
        return (eta_prime(self.temporal, t / self.R ** 2) / self.R ** 2
                * phi_eval(self.spatial, np.asarray(r) / self.R))

    def lap_psi(self, t: float, r):
        """Spatial Laplacian; scale factor R^-2 from the argument x/R."""
        return (eta_eval(self.temporal, t / self.R ** 2) / self.R ** 2
                * laplacian_phi(self.spatial, np.asarray(r) / self.R))

    def support_end(self) -> float:
        """Physical time at which psi_R vanishes: T * R^2."""
        return self.temporal.T * self.R ** 2


# ---------------------------------------------------------------------------
# the two Hoelder weights


def _check_theta(tc: TemporalCutoff, p: float) -> float:
    q = p / (p - 1.0)
    if not tc.theta > 1.0 / (p - 1.0):
        raise DivergentIntegralError(
            f"theta = {tc.theta} must exceed 1/(p-1) = {1.0 / (p - 1.0):.6g}")
    return q


def a_closed(tc: TemporalCutoff, p: float, l1_norm: float) -> float:
    """Closed form of the descent weight A(S, T).

    A^q integrates |eta'|^q * eta^(-1/(p-1)) in time against phi in
    space; the time factor collapses to
    theta^q / (theta - 1/(p-1)) * (T - S)^(-q/p).
    """
    q = _check_theta(tc, p)
    time_factor = (tc.theta * (tc.theta - 1.0 / (p - 1.0)) ** (-1.0 / q)
                   * (tc.T - tc.S) ** (-1.0 / p))
    return time_factor * l1_norm ** (1.0 / q)


def b_closed(tc: TemporalCutoff, p: float, l1_norm: float) -> float:
    """Closed form of the plateau weight B(S, T) = (S + (T-S)/(theta+1))^(1/q)."""
    q = _check_theta(tc, p)
    return ((tc.S + (tc.T - tc.S) / (tc.theta + 1.0)) * l1_norm) ** (1.0 / q)


_QUAD_OPTS = dict(epsabs=1e-13, epsrel=1e-11, limit=400)


def _guarded_quad(f, a, b, what: str, points=None) -> float:
    val, err = integrate.quad(f, a, b, points=points, **_QUAD_OPTS)
    if err > 1e-8 * max(abs(val), 1e-12):
        raise QuadratureToleranceError(what, val, err)
    return val


def a_quadrature(tc: TemporalCutoff, p: float, spec: SpatialCutoff) -> float:
    """Adaptive-quadrature oracle for a_closed.

    The integrand has an integrable endpoint singularity at t = T
    whenever theta < q; Gauss-Kronrod panels never evaluate the
    endpoint, so no regularization is needed.
    """
    q = _check_theta(tc, p)
    expo = -1.0 / (p - 1.0)

    def integrand(t):
        return abs(eta_prime(tc, t)) ** q * eta_eval(tc, t) ** expo

    time_part = _guarded_quad(integrand, tc.S, tc.T, "descent weight")
    return (time_part * compute_l1_norm(spec)) ** (1.0 / q)


def b_quadrature(tc: TemporalCutoff, p: float, spec: SpatialCutoff) -> float:
    """Adaptive-quadrature oracle for b_closed."""
    q = _check_theta(tc, p)
    time_part = _guarded_quad(lambda t: eta_eval(tc, t), 0.0, tc.T,
                              "plateau weight", points=[tc.S])
    return (time_part * compute_l1_norm(spec)) ** (1.0 / q)
