"""Lifespan sweeps: blow-up times across epsilon and the scaling fit.

A sweep runs one blow-up measurement per epsilon (optionally validated
against a once-refined grid), fits log T against log eps on the clean
records, and compares the fitted slope with the closed-form bracket
[1/kappa, 1/omega] from the lifespan bounds.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import List, Optional, Sequence, Tuple

from .bounds import (BoundConstants, OutOfRegimeError, build_constants,
                     lifespan_lower, lifespan_upper)
from .config import (RunConfig, effective_workers, make_data_spec, make_grid,
                     make_params, make_settings, make_spatial)
from .exponents import ExponentSet, compute_exponents
from .numerics import ols_loglog
from .solver import (LifespanRecord, TrajectoryLog, evolve_until_blowup,
                     make_initial_data)

VERDICT_IN = "IN_BRACKET"
VERDICT_OUT = "OUT_OF_BRACKET"
VERDICT_INCONCLUSIVE = "INCONCLUSIVE"


# ---------------------------------------------------------------------------
# single measurements


def run_single(cfg: RunConfig, epsilon: float, refine_factor: int = 1,
               snapshot_stride: Optional[int] = None,
               ) -> Tuple[LifespanRecord, TrajectoryLog]:
    """One forward run at the configured (optionally refined) resolution."""
    params = make_params(cfg, epsilon)
    grid = make_grid(cfg, refine_factor)
    spec = make_data_spec(cfg)
    state = make_initial_data(spec, grid, params)
    settings = make_settings(cfg, snapshot_stride)
    return evolve_until_blowup(state, settings, params.lam, params.p,
                               epsilon=epsilon, data=spec)


def run_point(cfg: RunConfig, epsilon: float,
              refine: Optional[bool] = None) -> LifespanRecord:
    """Blow-up measurement at one epsilon, with resolution validation.

    When refinement runs, the same problem is re-measured on a grid
    with twice the points and the relative gap in detection times is
    stored on the base record.
    """
    record, _ = run_single(cfg, epsilon, snapshot_stride=0)
    do_refine = cfg.sweep.refine if refine is None else refine
    if do_refine:
        fine, _ = run_single(cfg, epsilon, refine_factor=2, snapshot_stride=0)
        if fine.T_detected > 0:
            record.refined_agreement = (abs(record.T_detected - fine.T_detected)
                                        / fine.T_detected)
        else:
            record.refined_agreement = math.inf
    return record


def _run_point_star(args: Tuple[RunConfig, float]) -> LifespanRecord:
    # Top-level so process pools can pickle it.
    cfg, epsilon = args
    return run_point(cfg, epsilon)


def is_clean(record: LifespanRecord, refine_tol: float = 0.05) -> bool:
    """Usable for fitting: detected, boundary-quiet, refinement-stable."""
    return (not record.censored
            and record.boundary_clean
            and record.refined_agreement is not None
            and record.refined_agreement <= refine_tol)


# ---------------------------------------------------------------------------
# fitting and verdicts


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    stderr: float
    n_points: int
    jackknife_max_dev: Optional[float]


def fit_scaling(records: Sequence[LifespanRecord],
                refine_tol: float = 0.05) -> Optional[ScalingFit]:
    """OLS fit of log T_detected against log epsilon on clean records."""
    clean = [r for r in records if is_clean(r, refine_tol)]
    if len(clean) < 2:
        return None
    eps = [r.epsilon for r in clean]
    ts = [r.T_detected for r in clean]
    slope, intercept, stderr = ols_loglog(eps, ts)
    jack = None
    if len(clean) >= 3:
        devs = []
        for i in range(len(clean)):
            s_i, _, _ = ols_loglog(eps[:i] + eps[i + 1:], ts[:i] + ts[i + 1:])
            devs.append(abs(s_i - slope))
        jack = max(devs)
    return ScalingFit(slope=slope, intercept=intercept, stderr=stderr,
                      n_points=len(clean), jackknife_max_dev=jack)


@dataclass(frozen=True)
class SweepSummary:
    n_records: int
    n_clean: int
    slope: Optional[float]
    intercept: Optional[float]
    stderr: Optional[float]
    jackknife_max_dev: Optional[float]
    inv_kappa: float
    inv_omega: float
    margin: Optional[float]
    bracket_lo: Optional[float]
    bracket_hi: Optional[float]
    monotone_ok: Optional[bool]
    verdict: str

    def as_dict(self) -> dict:
        return asdict(self)


def summarize_sweep(records: Sequence[LifespanRecord], exps: ExponentSet,
                    refine_tol: float = 0.05, min_clean: int = 5,
                    base_margin: float = 0.25,
                    monotone_tol: float = 0.05) -> SweepSummary:
    """Fit, bracket comparison and verdict for one sweep.

    The bracket is [1/kappa - margin, 1/omega + margin] with
    margin = 2 stderr + base_margin; fewer than min_clean clean records
    yields INCONCLUSIVE rather than a verdict either way.
    """
    fit = fit_scaling(records, refine_tol)
    inv_kappa = 1.0 / exps.kappa
    inv_omega = 1.0 / exps.omega
    clean = [r for r in records if is_clean(r, refine_tol)]
    monotone = None
    if len(clean) >= 2:
        ordered = sorted(clean, key=lambda r: r.epsilon, reverse=True)
        monotone = all(b.T_detected >= a.T_detected * (1.0 - monotone_tol)
                       for a, b in zip(ordered, ordered[1:]))
    if fit is None or fit.n_points < min_clean:
        return SweepSummary(
            n_records=len(records), n_clean=len(clean),
            slope=None if fit is None else fit.slope,
            intercept=None if fit is None else fit.intercept,
            stderr=None if fit is None else fit.stderr,
            jackknife_max_dev=None if fit is None else fit.jackknife_max_dev,
            inv_kappa=inv_kappa, inv_omega=inv_omega, margin=None,
            bracket_lo=None, bracket_hi=None, monotone_ok=monotone,
            verdict=VERDICT_INCONCLUSIVE)
    margin = 2.0 * fit.stderr + base_margin
    lo = inv_kappa - margin
    hi = inv_omega + margin
    verdict = VERDICT_IN if lo <= fit.slope <= hi else VERDICT_OUT
    return SweepSummary(
        n_records=len(records), n_clean=len(clean), slope=fit.slope,
        intercept=fit.intercept, stderr=fit.stderr,
        jackknife_max_dev=fit.jackknife_max_dev,
        inv_kappa=inv_kappa, inv_omega=inv_omega, margin=margin,
        bracket_lo=lo, bracket_hi=hi, monotone_ok=monotone, verdict=verdict)


# ---------------------------------------------------------------------------
# closed-form bound comparison


@dataclass(frozen=True)
class BoundComparison:
    epsilon: float
    T_detected: float
    T_lower: float
    T_upper: float          # nan when epsilon is out of the valid range
    exceeds_upper: bool

    def as_dict(self) -> dict:
        return asdict(self)


def compare_bounds(records: Sequence[LifespanRecord],
                   consts: BoundConstants, exps: ExponentSet,
                   lower_constant: float = 1.0) -> List[BoundComparison]:
    """Bracket every record between the closed-form lifespan bounds."""
    rows = []
    for record in records:
        t_low = lifespan_lower(record.epsilon, exps, lower_constant)
        try:
            t_up = lifespan_upper(record.epsilon, consts, exps)
        except OutOfRegimeError:
            t_up = math.nan
        rows.append(BoundComparison(
            epsilon=record.epsilon, T_detected=record.T_detected,
            T_lower=t_low, T_upper=t_up,
            exceeds_upper=(math.isfinite(t_up)
                           and record.T_detected > t_up)))
    return rows


# ---------------------------------------------------------------------------
# the sweep itself


@dataclass
class SweepResult:
    config: RunConfig
    exponents: ExponentSet
    records: List[LifespanRecord]
    summary: SweepSummary
    comparisons: List[BoundComparison]

    def as_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "exponents": self.exponents.as_dict(),
            "records": [r.as_dict() for r in self.records],
            "summary": self.summary.as_dict(),
            "comparisons": [c.as_dict() for c in self.comparisons],
        }


def run_sweep(cfg: RunConfig) -> SweepResult:
    """Measure every epsilon on the grid and summarize the scaling.

    Records are produced in descending epsilon order regardless of the
    worker count, so identical configs give identical output.
    """
    eps_list = sorted(cfg.sweep.eps_grid, reverse=True)
    if not eps_list:
        raise ValueError("sweep needs a nonempty eps_grid")
    workers = effective_workers(cfg)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_point_star,
                                    [(cfg, e) for e in eps_list]))
    else:
        records = [run_point(cfg, e) for e in eps_list]

    params = make_params(cfg)
    exps = compute_exponents(params)
    consts = build_constants(params, make_spatial(cfg), cfg.cutoff.theta)
    summary = summarize_sweep(records, exps,
                              refine_tol=cfg.sweep.refine_tol,
                              min_clean=cfg.sweep.min_clean,
                              base_margin=cfg.sweep.base_margin)
    comparisons = compare_bounds(records, consts, exps)
    return SweepResult(config=cfg, exponents=exps, records=records,
                       summary=summary, comparisons=comparisons)
