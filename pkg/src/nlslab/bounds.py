"""Closed-form lifespan bounds and the constants that feed them.

Everything here is scalar arithmetic on top of the calibrated cutoffs:

  * psi_fun          envelope max_{x>=0} (sigma x^omega - x), closed form
  * d_of_t           two-power cost D(T) = a_p T^(-1/p) + b_p T^(1/q)
  * min_d            its minimizer and minimum in closed form
  * jr_upper         upper bound on the data pairing J_R at radius R
  * jr_lower         certified lower bound C_k * eps * R^(n-k)
  * h_fun / g_fun    the tangent construction that turns the two-power
                     cost into a single power law G(tau) = C3 * tau^kappa
  * lifespan_upper   (eps / C4)^(1/kappa), valid for 0 < eps < C4
  * lifespan_lower   C * eps^(1/omega) with a caller-chosen constant

The cutoff profile is pinned by phi(0) = 1 rather than unit mass, so
a_p and b_p carry the factor ||phi||_L1^(1/q); every identity checked in
the tests folds the same factor, keeping the chain self-consistent.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import integrate

from .cutoffs import (SpatialCutoff, TemporalCutoff, compute_l1_norm,
                      compute_mu, surface_area, QuadratureToleranceError)
from .exponents import (CaseTag, ExponentSet, InadmissibleParams,
                        ProblemParams, compute_exponents, select_case,
                        validate_params)


class OutOfRegimeError(ValueError):
    """A bound was requested outside its validity window."""


def psi_fun(sigma: float, omega: float) -> float:
    """max over x >= 0 of sigma * x^omega - x, for 0 < omega < 1.

    Closed form (1 - omega) * omega^(omega/(1-omega)) * sigma^(1/(1-omega)).
    """
    if not 0.0 < omega < 1.0:
        raise ValueError(f"omega must lie in (0, 1), got {omega!r}")
    if not sigma > 0.0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    return ((1.0 - omega) * omega ** (omega / (1.0 - omega))
            * sigma ** (1.0 / (1.0 - omega)))


@dataclass(frozen=True)
class BoundConstants:
    """Calibrated constants for one (params, cutoff, theta) choice.

    a_p, b_p include the ||phi||_L1^(1/q) factor.  C_k is the tail mass
    of |x|^(-k) against phi outside radius 1/R0; C1 the envelope
    prefactor; C2 = C1 / C_k; C3 the tangent-line constant of G; and
    C4 = C2 * C3 the prefactor of the upper lifespan bound.
    """

    n: int
    p: float
    k: float
    q: float
    kappa: float
    theta: float
    lambda_eff: float
    mu: float
    l1_norm: float
    a_p: float
    b_p: float
    tangent_coeff: float   # y-per-tau slope of the minimizing substitution
    R0: float
    C_k: float
    C1: float
    C2: float
    C3: float
    C4: float
    case: CaseTag

    def as_dict(self) -> dict:
        out = asdict(self)
        out["case"] = {
            "branch": self.case.branch.value,
            "jr_integrand_selector": self.case.jr_integrand_selector,
        }
        return out


def ab_weights(theta: float, p: float, mu: float,
               l1_norm: float) -> Tuple[float, float]:
    """Unit-window weights (a_p, b_p) of the two-power cost D.

    a_p carries the descent integral A(0, 1), b_p folds mu into the
    plateau integral B(0, 1); both carry ||phi||_L1^(1/q).
    """
    q = p / (p - 1.0)
    if not theta > 1.0 / (p - 1.0):
        raise OutOfRegimeError(
            f"theta = {theta} must exceed 1/(p-1) = {1.0 / (p - 1.0):.6g}")
    fold = l1_norm ** (1.0 / q)
    a_p = fold * theta / (theta - 1.0 / (p - 1.0)) ** (1.0 / q)
    b_p = fold * mu / (theta + 1.0) ** (1.0 / q)
    return a_p, b_p


def tail_weight(spec: SpatialCutoff, k: float, radius: float) -> float:
    """Integral of |x|^(-k) phi(x) over |x| >= radius, by radial quadrature."""
    n = spec.n
    val, err = integrate.quad(
        lambda r: r ** (n - 1 - k) * math.exp(1.0 - (1.0 + r * r) ** (spec.nu / 2.0)),
        radius, np.inf, epsabs=1e-14, epsrel=1e-11, limit=400)
    total = surface_area(n) * val
    if err * surface_area(n) > 1e-8 * max(abs(total), 1e-13):
        raise QuadratureToleranceError("tail weight", total, err)
    return total


def build_constants(params: ProblemParams, spec: SpatialCutoff, theta: float,
                    r0: Optional[float] = None) -> BoundConstants:
    """Assemble every constant of the upper-bound chain.

    Rejects inadmissible parameters (the chain needs the full window).
    r0 defaults to half the tangent radius at tau = 1, which keeps the
    whole branch tau > 1 on the valid side of the truncation.
    """
    report = validate_params(params)
    if not report.admissible:
        raise InadmissibleParams(report)
    if spec.n != params.n:
        raise ValueError(f"cutoff dimension {spec.n} != problem dimension {params.n}")

    exps = compute_exponents(params)
    case = select_case(params)
    lam_eff = case.lambda_eff(params.lam)
    if lam_eff == 0.0:
        # e.g. purely imaginary lam never lands here; a zero component can.
        raise ValueError("selected coefficient component vanishes")

    p, q, k, n = params.p, exps.q, params.k, params.n
    mu = compute_mu(spec)
    l1 = compute_l1_norm(spec)
    a_p, b_p = ab_weights(theta, p, mu, l1)

    beta1 = exps.beta1
    tangent_coeff = b_p * beta1 / (a_p * (1.0 - beta1))
    if r0 is None:
        r0 = 0.5 * math.sqrt(tangent_coeff)
    elif not 0.0 < r0 < math.sqrt(tangent_coeff):
        raise OutOfRegimeError(
            f"R0 = {r0} must lie in (0, {math.sqrt(tangent_coeff):.6g})")

    c_k = tail_weight(spec, k, 1.0 / r0)
    if c_k == 0.0:
        # Large theta shrinks b_p, hence the admissible R0 interval, and
        # the tail beyond 1/R0 underflows; the tangent chain carries no
        # information there.
        raise OutOfRegimeError(
            f"tail weight underflows beyond radius 1/R0 = {1.0 / r0:.4g}; "
            f"theta = {theta} is too large for the tangent chain")
    c1 = lam_eff ** (-1.0 / (p - 1.0)) * (p - 1.0) * (1.0 / p) ** q
    c2 = c1 / c_k

    # Tangent constant from one evaluation on the optimizing ray.
    tau_star = 2.0
    r_star = math.sqrt(tangent_coeff * tau_star)
    h_star = (a_p * tau_star ** (-1.0 / p) * r_star ** exps.alpha1
              + b_p * tau_star ** (1.0 / q) * r_star ** (-exps.alpha2)) ** q
    c3 = h_star * tau_star ** (-exps.kappa)
    c4 = c2 * c3

    return BoundConstants(n=n, p=p, k=k, q=q, kappa=exps.kappa, theta=theta,
                          lambda_eff=lam_eff, mu=mu, l1_norm=l1,
                          a_p=a_p, b_p=b_p, tangent_coeff=tangent_coeff,
                          R0=r0, C_k=c_k, C1=c1, C2=c2, C3=c3, C4=c4,
                          case=case)


def d_of_t(T: float, consts: BoundConstants, p: float) -> float:
    """Two-power cost D(T) = a_p T^(-1/p) + b_p T^(1/q)."""
    if not T > 0:
        raise ValueError(f"T must be positive, got {T!r}")
    q = p / (p - 1.0)
    return consts.a_p * T ** (-1.0 / p) + consts.b_p * T ** (1.0 / q)


def min_d_weights(a_p: float, b_p: float, p: float) -> Tuple[float, float]:
    """Minimizer and minimum of T -> a_p T^(-1/p) + b_p T^(1/q)."""
    q = p / (p - 1.0)
    t_min = a_p * q / (b_p * p)
    d_min = (p * (p - 1.0) ** (-1.0 / q)
             * a_p ** (1.0 / q) * b_p ** (1.0 / p))
    return t_min, d_min


def min_d(consts: BoundConstants, p: float) -> Tuple[float, float]:
    """Minimizer and minimum of D: (T_min, p (p-1)^(-1/q) a_p^(1/q) b_p^(1/p))."""
    return min_d_weights(consts.a_p, consts.b_p, p)


def min_d_limit(mu: float, l1_norm: float, p: float) -> float:
    """Limit of min D as theta grows: ||phi||^(1/q) mu^(1/p) p (p-1)^(-1/q)."""
    q = p / (p - 1.0)
    return (l1_norm ** (1.0 / q) * mu ** (1.0 / p)
            * p * (p - 1.0) ** (-1.0 / q))


def min_d_theta_limit(consts: BoundConstants, p: float) -> float:
    return min_d_limit(consts.mu, consts.l1_norm, p)


def jr_upper(R: float, T: float, consts: BoundConstants, p: float) -> float:
    """Upper bound on the data pairing at radius R and rescaled horizon T.

    Evaluates lambda_eff * psi_fun(D(T) R^s / lambda_eff, 1/p) and its
    simplified form C1 R^(sq) D(T)^q; the two agree to roundoff and the
    simplified value is returned.
    """
    if not R > 0:
        raise ValueError(f"R must be positive, got {R!r}")
    q = p / (p - 1.0)
    s = -2.0 + (2.0 + consts.n) / q
    d_val = d_of_t(T, consts, p)
    lam = consts.lambda_eff
    via_envelope = lam * psi_fun(d_val * R ** s / lam, 1.0 / p)
    direct = consts.C1 * R ** (s * q) * d_val ** q
    assert abs(via_envelope - direct) <= 1e-10 * max(abs(direct), 1e-300), \
        "envelope and simplified forms disagree"
    return direct


def jr_lower(R: float, epsilon: float, consts: BoundConstants) -> float:
    """Certified lower bound C_k * eps * R^(n-k), valid for R > R0."""
    if not R > consts.R0:
        raise OutOfRegimeError(f"R = {R} must exceed R0 = {consts.R0:.6g}")
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")
    return consts.C_k * epsilon * R ** (consts.n - consts.k)


def h_fun(tau: float, R: float, consts: BoundConstants, exps: ExponentSet) -> float:
    """Rescaled chain cost {a_p tau^(-1/p) R^alpha1 + b_p tau^(1/q) R^(-alpha2)}^q."""
    if not (tau > 0 and R > 0):
        raise ValueError("tau and R must be positive")
    p, q = exps.p, exps.q
    return (consts.a_p * tau ** (-1.0 / p) * R ** exps.alpha1
            + consts.b_p * tau ** (1.0 / q) * R ** (-exps.alpha2)) ** q


def g_fun(tau: float, consts: BoundConstants, exps: ExponentSet) -> Tuple[float, float]:
    """Envelope G(tau) = C3 tau^kappa and the tangent radius R_tau.

    R_tau is where h_fun touches the envelope:
    R_tau = sqrt(b_p beta1 / (a_p (1 - beta1)) * tau).
    """
    if not tau > 1.0:
        raise OutOfRegimeError(f"tau must exceed 1, got {tau!r}")
    r_tau = math.sqrt(consts.tangent_coeff * tau)
    return consts.C3 * tau ** exps.kappa, r_tau


def lifespan_upper(epsilon: float, consts: BoundConstants,
                   exps: ExponentSet) -> float:
    """Upper lifespan bound (eps / C4)^(1/kappa) for 0 < eps < C4."""
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")
    if not epsilon < consts.C4:
        raise OutOfRegimeError(
            f"eps = {epsilon} must stay below eps0 = C4 = {consts.C4:.6g}")
    return (epsilon / consts.C4) ** (1.0 / exps.kappa)


def lifespan_lower(epsilon: float, exps: ExponentSet,
                   constant: float = 1.0) -> float:
    """Lower lifespan bound C * eps^(1/omega).

    The local theory leaves the constant unspecified; it is caller
    configurable and defaults to one, so the value is shape-only.
    Requires omega < 0, i.e. p < 1 + 4/n.
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")
    if not exps.omega < 0:
        raise OutOfRegimeError(
            f"lower bound needs omega < 0, got omega = {exps.omega!r}")
    if not constant > 0:
        raise ValueError(f"constant must be positive, got {constant!r}")
    return constant * epsilon ** (1.0 / exps.omega)
