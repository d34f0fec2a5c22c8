"""Admissibility checks and the scalar exponents of the lifespan bracket.

The model problem is

    i du/dt + Lap(u) = lam * |u|^p,    u(0, x) = eps * f(x),

on R^n with complex lam = lam1 + i*lam2 != 0.  Everything downstream
(cutoff calibration, bound constants, sweep verdicts) is driven by a
handful of exponents derived from (n, p, k).  This module computes them
and enforces the parameter window in which the upper lifespan bound is
available:

    1 < p < 1 + 2/n        (subcritical power)
    n < k < 2/(p - 1)      (decay rate of the data tail)

The critical power p = 1 + 2/n is flagged separately: solver and
weak-form paths accept it, bound computations reject it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional


class InadmissibleParams(ValueError):
    """Raised when parameters fall outside the bound-theory window."""

    def __init__(self, report: "ValidationReport"):
        self.report = report
        failed = ", ".join(c.name for c in report.checks if not c.passed)
        super().__init__(f"inadmissible parameters ({failed})")


@dataclass(frozen=True)
class ProblemParams:
    """Problem data: dimension, power, coefficient, tail rate, data size.

    k is optional so that validation can report its absence instead of
    refusing to construct; every bound computation requires it.
    """

    n: int
    p: float
    lambda_re: float
    lambda_im: float
    k: Optional[float] = None
    epsilon: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not self.p > 1:
            raise ValueError(f"p must exceed 1, got {self.p!r}")
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon!r}")

    @property
    def lam(self) -> complex:
        return complex(self.lambda_re, self.lambda_im)

    @property
    def p_critical(self) -> float:
        return 1.0 + 2.0 / self.n


@dataclass(frozen=True)
class ConstraintCheck:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[ConstraintCheck, ...]
    admissible: bool
    critical: bool

    def failures(self) -> list[ConstraintCheck]:
        return [c for c in self.checks if not c.passed]

    def as_dict(self) -> dict:
        return {
            "admissible": self.admissible,
            "critical": self.critical,
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail}
                for c in self.checks
            ],
        }


def validate_params(params: ProblemParams) -> ValidationReport:
    """Check every constraint of the bound theory; never raises.

    The report lists each constraint with a pass flag and a one-line
    detail.  `admissible` is True iff all of them pass.  `critical`
    flags p = 1 + 2/n, which is rejected here but accepted by the
    solver and weak-form paths.
    """
    n, p, k = params.n, params.p, params.k
    p_crit = params.p_critical
    critical = math.isclose(p, p_crit, rel_tol=1e-12, abs_tol=0.0)
    checks = []

    lam_ok = params.lam != 0
    checks.append(ConstraintCheck(
        "lambda_nonzero", lam_ok,
        f"lam = {params.lam}" + ("" if lam_ok else " must be nonzero")))

    if critical:
        p_ok = False
        p_detail = f"p = {p} equals the critical power 1 + 2/n = {p_crit}"
    elif p < p_crit:
        p_ok = True
        p_detail = f"1 < p = {p} < 1 + 2/n = {p_crit}"
    else:
        p_ok = False
        p_detail = f"p = {p} >= 1 + 2/n = {p_crit}"
    checks.append(ConstraintCheck("p_subcritical", p_ok, p_detail))

    if k is None:
        checks.append(ConstraintCheck("k_range", False, "k not supplied"))
    else:
        k_hi = 2.0 / (p - 1.0)
        k_ok = n < k < k_hi
        detail = f"need n = {n} < k = {k} < 2/(p-1) = {k_hi:.6g}"
        if k_hi <= n:
            detail += " (window empty)"
        checks.append(ConstraintCheck("k_range", k_ok, detail))

    return ValidationReport(
        checks=tuple(checks),
        admissible=all(c.passed for c in checks),
        critical=critical,
    )


@dataclass(frozen=True)
class ExponentSet:
    """Derived exponents.  kappa < 0 < ... invariants are test-enforced.

    omega drives the lower lifespan bound eps^(1/omega), kappa the upper
    bound eps^(1/kappa); both are negative in the admissible window and
    kappa - omega = k/2 - n/4 > 0.  sigma is only defined once an
    auxiliary integrability index gamma is chosen; sigma_limit is its
    limiting value as gamma decreases to (2/n)(p+1)/(p-1).
    """

    n: int
    p: float
    k: Optional[float]
    q: float          # conjugate exponent p/(p-1)
    s: float          # parabolic scaling weight -2 + (2+n)/q
    omega: float
    kappa: Optional[float]
    alpha1: Optional[float]
    alpha2: Optional[float]
    beta1: Optional[float]
    rho: float        # Strichartz pair (rho, r) used by the local theory
    r: float
    sigma_limit: float
    gamma: Optional[float] = None
    sigma: Optional[float] = None

    def as_dict(self) -> dict:
        d = {
            "n": self.n, "p": self.p, "k": self.k,
            "q": self.q, "s": self.s,
            "omega": self.omega, "kappa": self.kappa,
            "inv_omega": 1.0 / self.omega if self.omega != 0 else None,
            "inv_kappa": 1.0 / self.kappa if self.kappa else None,
            "alpha1": self.alpha1, "alpha2": self.alpha2, "beta1": self.beta1,
            "rho": self.rho, "r": self.r,
            "gamma": self.gamma, "sigma": self.sigma,
            "sigma_limit": self.sigma_limit,
        }
        return d


def compute_exponents(params: ProblemParams,
                      gamma: Optional[float] = None,
                      enforce: bool = True) -> ExponentSet:
    """Compute the exponent set for params.

    With enforce=True (the default) inadmissible parameters raise
    InadmissibleParams carrying the full validation report.  With
    enforce=False the scale exponents (q, s, omega, rho, r) are computed
    for any p > 1 and the k-dependent fields whenever k is supplied;
    this relaxed mode backs the solver and weak-form paths at the
    critical power.
    """
    report = validate_params(params)
    if enforce and not report.admissible:
        raise InadmissibleParams(report)

    n, p, k = params.n, params.p, params.k
    q = p / (p - 1.0)
    s = -2.0 + (2.0 + n) / q
    omega = n / 4.0 - 1.0 / (p - 1.0)
    rho = p + 1.0
    # Strichartz partner of rho: 2/r = n/2 - n/rho.
    r = 4.0 * (p + 1.0) / (n * (p - 1.0))
    sigma_limit = (n / 2.0) * (1.0 - 1.0 / (p + 1.0)) - 1.0 / (p - 1.0)

    kappa = alpha1 = alpha2 = beta1 = None
    if k is not None:
        kappa = k / 2.0 - 1.0 / (p - 1.0)
        alpha1 = k / q
        alpha2 = 2.0 - alpha1
        beta1 = alpha2 / 2.0

    sigma = None
    if gamma is not None:
        gamma_lo = (2.0 / n) * (p + 1.0) / (p - 1.0)
        if not gamma > gamma_lo:
            raise ValueError(
                f"gamma = {gamma} must exceed (2/n)(p+1)/(p-1) = {gamma_lo:.6g}")
        sigma = 1.0 / gamma + n / (2.0 * (p + 1.0)) - 1.0 / (p - 1.0)

    return ExponentSet(n=n, p=p, k=k, q=q, s=s, omega=omega, kappa=kappa,
                       alpha1=alpha1, alpha2=alpha2, beta1=beta1,
                       rho=rho, r=r, sigma_limit=sigma_limit,
                       gamma=gamma, sigma=sigma)


class CaseBranch(Enum):
    LAMBDA1_POS = "LAMBDA1_POS"
    LAMBDA1_NEG = "LAMBDA1_NEG"
    LAMBDA2_POS = "LAMBDA2_POS"
    LAMBDA2_NEG = "LAMBDA2_NEG"


# Which signed component of f enters the data pairing J_R for each branch.
_JR_SELECTOR = {
    CaseBranch.LAMBDA1_POS: "-f2",
    CaseBranch.LAMBDA1_NEG: "+f2",
    CaseBranch.LAMBDA2_POS: "+f1",
    CaseBranch.LAMBDA2_NEG: "-f1",
}


@dataclass(frozen=True)
class CaseTag:
    branch: CaseBranch
    jr_integrand_selector: str

    def lambda_eff(self, lam: complex) -> float:
        """Absolute value of the coefficient component the case singles out."""
        if self.branch in (CaseBranch.LAMBDA1_POS, CaseBranch.LAMBDA1_NEG):
            return abs(lam.real)
        return abs(lam.imag)


def select_case(params: ProblemParams) -> CaseTag:
    """Pick the sign branch that makes the data pairing J_R positive.

    Preference order: positive real part, positive imaginary part, then
    the mirrored negative branches.  lam = 0 has no usable branch.
    """
    lam1, lam2 = params.lambda_re, params.lambda_im
    if lam1 > 0:
        branch = CaseBranch.LAMBDA1_POS
    elif lam2 > 0:
        branch = CaseBranch.LAMBDA2_POS
    elif lam1 < 0:
        branch = CaseBranch.LAMBDA1_NEG
    elif lam2 < 0:
        branch = CaseBranch.LAMBDA2_NEG
    else:
        raise ValueError("lam = 0: no sign branch applies")
    return CaseTag(branch=branch, jr_integrand_selector=_JR_SELECTOR[branch])
