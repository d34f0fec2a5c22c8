"""Command line front end.

Subcommands: exponents, bounds, simulate, sweep, verify.  Every
command accepts --json for machine-readable output; exit code 0 means
all requested checks passed, 2 means a usage error or inadmissible
parameters.  JSON output is deterministic (sorted keys, no
timestamps), so reruns of the same command diff clean.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import shutil
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from .bounds import (OutOfRegimeError, ab_weights, build_constants,
                     lifespan_lower, lifespan_upper, min_d_limit,
                     min_d_weights)
from .config import effective_workers, load_config, make_settings
from .cutoffs import (DivergentIntegralError, compute_l1_norm, compute_mu,
                      make_spatial_cutoff)
from .exponents import (InadmissibleParams, ProblemParams, ValidationReport,
                        compute_exponents, validate_params)
from .sweep import SweepResult, run_point, run_single, run_sweep
from .verify import SUITES

USAGE_ERROR = 2

_DEFAULT_EPS = tuple(0.5 * 2.0 ** (-j / 2.0) for j in range(10))


def _emit_json(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def _write_json(payload: dict, path: Path) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def _params_from_args(args: argparse.Namespace) -> ProblemParams:
    return ProblemParams(n=args.n, p=args.p, lambda_re=args.lambda_re,
                         lambda_im=args.lambda_im, k=args.k)


def _print_validation(report: ValidationReport) -> None:
    for check in report.checks:
        print(f"  [{'PASS' if check.passed else 'FAIL'}] "
              f"{check.name}: {check.detail}")


# ---------------------------------------------------------------------------
# exponents


def cmd_exponents(args: argparse.Namespace) -> int:
    try:
        params = _params_from_args(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    report = validate_params(params)
    if not report.admissible:
        if args.json:
            _emit_json({"admissible": False, "validation": report.as_dict()})
        else:
            print("inadmissible parameters:")
            _print_validation(report)
        return USAGE_ERROR
    try:
        exps = compute_exponents(params, gamma=args.gamma)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR

    if args.json:
        _emit_json({"admissible": True, "exponents": exps.as_dict(),
                    "validation": report.as_dict()})
        return 0
    print(f"n = {params.n}, p = {params.p}, k = {params.k}, "
          f"lambda = {params.lam}")
    for name, value in exps.as_dict().items():
        if value is None:
            continue
        print(f"  {name:>12} = {value:+.12g}")
    print("admissibility:")
    _print_validation(report)
    return 0


# ---------------------------------------------------------------------------
# bounds


def cmd_bounds(args: argparse.Namespace) -> int:
    try:
        params = _params_from_args(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    report = validate_params(params)
    if not report.admissible:
        print("inadmissible parameters:", file=sys.stderr)
        for check in report.failures():
            print(f"  {check.name}: {check.detail}", file=sys.stderr)
        return USAGE_ERROR
    spec = make_spatial_cutoff(nu=args.nu, n=args.n)
    exps = compute_exponents(params)

    chain_note = None
    consts = None
    try:
        consts = build_constants(params, spec, theta=args.theta)
    except OutOfRegimeError as exc:
        # The tangent chain degenerates at extreme theta; min D and the
        # lower bound survive, so report those and leave T_upper empty.
        chain_note = str(exc)
    except (InadmissibleParams, ValueError, DivergentIntegralError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR

    mu = compute_mu(spec)
    l1 = compute_l1_norm(spec)
    try:
        a_p, b_p = ab_weights(args.theta, params.p, mu, l1)
    except OutOfRegimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    t_min, d_min = min_d_weights(a_p, b_p, params.p)
    eps_values = tuple(args.eps) if args.eps else _DEFAULT_EPS

    rows = []
    for eps in eps_values:
        t_low = lifespan_lower(eps, exps)
        t_up = math.nan
        if consts is not None:
            try:
                t_up = lifespan_upper(eps, consts, exps)
            except OutOfRegimeError:
                pass
        rows.append({"epsilon": eps, "T_lower": t_low, "T_upper": t_up})

    payload = {
        "constants": None if consts is None else consts.as_dict(),
        "chain_note": chain_note,
        "exponents": exps.as_dict(),
        "weights": {"mu": mu, "l1_norm": l1, "a_p": a_p, "b_p": b_p},
        "min_D": {"T_min": t_min, "value": d_min,
                  "theta_limit": min_d_limit(mu, l1, params.p)},
        "eps_threshold": None if consts is None else consts.C4,
        "bracket": rows,
    }

    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epsilon", "T_lower", "T_upper"])
            for row in rows:
                writer.writerow([repr(row["epsilon"]), repr(row["T_lower"]),
                                 repr(row["T_upper"])])

    if args.json:
        _emit_json(payload)
        return 0
    print(f"constants (theta = {args.theta}, nu = {args.nu}):")
    if consts is not None:
        for name, value in consts.as_dict().items():
            if isinstance(value, dict):
                value = value["branch"] + " / " + value["jr_integrand_selector"]
            print(f"  {name:>13} = {value}")
        print(f"  upper bound valid for eps < C4 = {consts.C4:.6g}")
    else:
        for name in ("mu", "l1_norm", "a_p", "b_p"):
            print(f"  {name:>13} = {payload['weights'][name]}")
        print(f"  tangent chain unavailable: {chain_note}")
    print(f"  min D = {d_min:.12g} at T = {t_min:.12g} "
          f"(theta -> inf limit {payload['min_D']['theta_limit']:.12g})")
    print(f"{'epsilon':>12} {'T_lower':>14} {'T_upper':>14}")
    for row in rows:
        print(f"{row['epsilon']:>12.6g} {row['T_lower']:>14.6g} "
              f"{row['T_upper']:>14.6g}")
    return 0


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args: argparse.Namespace) -> int:
    try:
        cfg = load_config(args.config)
    except (OSError, ValueError, TypeError) as exc:
        print(f"error: cannot load config: {exc}", file=sys.stderr)
        return USAGE_ERROR
    epsilon = args.eps if args.eps is not None else cfg.sweep.eps_grid[0]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    shutil.copyfile(args.config, out / "config.json")

    record, traj = run_single(cfg, epsilon)
    if not args.no_refine and cfg.sweep.refine:
        fine, _ = run_single(cfg, epsilon, refine_factor=2, snapshot_stride=0)
        if fine.T_detected > 0:
            record.refined_agreement = (abs(record.T_detected - fine.T_detected)
                                        / fine.T_detected)
        else:
            record.refined_agreement = math.inf

    _write_json(record.as_dict(), out / "record.json")

    if len(traj.times) > 1:
        import numpy as np
        np.savez_compressed(out / "snapshots.npz",
                            times=np.asarray(traj.times),
                            fields=np.stack(traj.fields))

    settings = make_settings(cfg)
    log_lines = [
        f"epsilon       {epsilon!r}",
        f"grid          n={cfg.problem.n} N={record.N} L={record.L}",
        f"dt0           {settings.dt0!r}",
        f"steps         {record.steps}",
        f"T_detected    {record.T_detected!r}",
        f"reason        {record.reason}",
        f"boundary      peak={record.boundary_peak:.6e} clean={record.boundary_clean}",
        f"refinement    {record.refined_agreement!r}",
        f"snapshots     {len(traj.times)}",
    ]
    (out / "run.log").write_text("\n".join(log_lines) + "\n", encoding="utf-8")

    if args.json:
        _emit_json(record.as_dict())
    else:
        print(f"T_detected = {record.T_detected:.6g} ({record.reason}, "
              f"{record.steps} steps) -> {out}")
    return 0


# ---------------------------------------------------------------------------
# sweep


_CSV_COLUMNS = ["epsilon", "T_detected", "reason", "refined_agreement",
                "boundary_clean", "T_lower", "T_upper"]


def write_sweep_csv(result: SweepResult, path: Path) -> None:
    by_eps = {c.epsilon: c for c in result.comparisons}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_COLUMNS)
        for rec in result.records:
            comp = by_eps[rec.epsilon]
            writer.writerow([
                repr(rec.epsilon),
                repr(rec.T_detected),
                rec.reason,
                "" if rec.refined_agreement is None
                else repr(rec.refined_agreement),
                "true" if rec.boundary_clean else "false",
                repr(comp.T_lower),
                repr(comp.T_upper),
            ])


def write_sweep_svg(result: SweepResult, path: Path) -> None:
    """Log-log scatter of detected lifespans with the bracket guides.

    The guide lines carry gid attributes (guide-slope-inv-kappa,
    guide-slope-inv-omega) so downstream tooling can address them
    inside the SVG; text is kept as text, not outlined paths.
    """
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    from .sweep import is_clean

    plt.rcParams["svg.fonttype"] = "none"
    plt.rcParams["svg.hashsalt"] = "nlslab"

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    clean = [r for r in result.records
             if is_clean(r, result.config.sweep.refine_tol)]
    rest = [r for r in result.records if r not in clean]
    if clean:
        ax.loglog([r.epsilon for r in clean], [r.T_detected for r in clean],
                  "o", color="tab:blue", label="clean")
    if rest:
        ax.loglog([r.epsilon for r in rest], [r.T_detected for r in rest],
                  "x", color="tab:red", label="excluded")

    eps = np.array(sorted(r.epsilon for r in result.records))
    summary = result.summary
    anchor_eps = math.sqrt(eps[0] * eps[-1])
    if summary.slope is not None and summary.intercept is not None:
        anchor_t = math.exp(summary.intercept) * anchor_eps ** summary.slope
        fit_line, = ax.loglog(
            eps, math.exp(summary.intercept) * eps ** summary.slope,
            "-", color="tab:blue", alpha=0.6,
            label=f"fit slope {summary.slope:.2f}")
        fit_line.set_gid("fit-line")
    else:
        det = [r.T_detected for r in result.records if r.T_detected > 0]
        anchor_t = float(np.median(det)) if det else 1.0

    for slope, name, style in ((summary.inv_kappa, "guide-slope-inv-kappa", "--"),
                               (summary.inv_omega, "guide-slope-inv-omega", ":")):
        line, = ax.loglog(eps, anchor_t * (eps / anchor_eps) ** slope,
                          style, color="gray",
                          label=f"eps^({slope:.3g})")
        line.set_gid(name)

    ax.set_xlabel("epsilon")
    ax.set_ylabel("detected lifespan")
    ax.set_title(f"lifespan scaling ({summary.verdict})")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def cmd_sweep(args: argparse.Namespace) -> int:
    try:
        cfg = load_config(args.config)
    except (OSError, ValueError, TypeError) as exc:
        print(f"error: cannot load config: {exc}", file=sys.stderr)
        return USAGE_ERROR
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    shutil.copyfile(args.config, out / "config.json")

    result = run_sweep(cfg)
    write_sweep_csv(result, out / "sweep.csv")
    _write_json(result.as_dict(), out / "summary.json")
    write_sweep_svg(result, out / "sweep.svg")

    summary = result.summary
    if args.json:
        _emit_json(summary.as_dict())
    else:
        print(f"sweep of {summary.n_records} epsilons "
              f"({summary.n_clean} clean, "
              f"{effective_workers(cfg)} worker(s)) -> {out}")
        if summary.slope is not None:
            print(f"  slope   {summary.slope:.4f} +- {summary.stderr:.4f}")
            if summary.bracket_lo is not None:
                print(f"  bracket [{summary.bracket_lo:.4f}, "
                      f"{summary.bracket_hi:.4f}] "
                      f"(1/kappa = {summary.inv_kappa:.4f}, "
                      f"1/omega = {summary.inv_omega:.4f})")
        print(f"  verdict {summary.verdict}")
    return 0


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args: argparse.Namespace) -> int:
    results = SUITES[args.suite]()
    all_ok = all(r.passed for r in results)
    if args.json:
        _emit_json({"suite": args.suite, "passed": all_ok,
                    "checks": [{"name": r.name, "passed": r.passed,
                                "detail": r.detail} for r in results]})
    else:
        for r in results:
            print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name} ({r.detail})")
        print(f"suite {args.suite}: "
              f"{sum(r.passed for r in results)}/{len(results)} passed")
    return 0 if all_ok else 1


# ---------------------------------------------------------------------------
# parser


def _add_problem_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--n", type=int, default=1, help="space dimension")
    sub.add_argument("--p", type=float, default=2.0, help="nonlinearity power")
    sub.add_argument("--k", type=float, default=1.5, help="data tail rate")
    sub.add_argument("--lambda-re", type=float, default=0.0,
                     help="real part of the coefficient")
    sub.add_argument("--lambda-im", type=float, default=1.0,
                     help="imaginary part of the coefficient")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlslab",
        description="lifespan laboratory for small-data blow-up")
    sub = parser.add_subparsers(dest="command", required=True)

    p_exp = sub.add_parser("exponents",
                           help="derived exponents and admissibility")
    _add_problem_flags(p_exp)
    p_exp.add_argument("--gamma", type=float, default=None,
                       help="auxiliary integrability index for sigma")
    p_exp.add_argument("--json", action="store_true")
    p_exp.set_defaults(func=cmd_exponents)

    p_bnd = sub.add_parser("bounds",
                           help="closed-form constants and lifespan bracket")
    _add_problem_flags(p_bnd)
    p_bnd.add_argument("--theta", type=float, default=20.0,
                       help="temporal cutoff power")
    p_bnd.add_argument("--nu", type=float, default=1.0,
                       help="spatial cutoff decay rate")
    p_bnd.add_argument("--eps", type=float, action="append", default=None,
                       help="epsilon for the bracket table (repeatable)")
    p_bnd.add_argument("--csv", type=str, default=None,
                       help="write (epsilon, T_lower, T_upper) rows here")
    p_bnd.add_argument("--json", action="store_true")
    p_bnd.set_defaults(func=cmd_bounds)

    p_sim = sub.add_parser("simulate", help="one blow-up measurement")
    p_sim.add_argument("config", help="path to a run config (JSON)")
    p_sim.add_argument("--eps", type=float, default=None,
                       help="override: largest grid value otherwise")
    p_sim.add_argument("--out", type=str, default="runs/simulate",
                       help="run directory")
    p_sim.add_argument("--no-refine", action="store_true",
                       help="skip the refinement agreement run")
    p_sim.add_argument("--json", action="store_true")
    p_sim.set_defaults(func=cmd_simulate)

    p_swp = sub.add_parser("sweep", help="epsilon sweep with scaling fit")
    p_swp.add_argument("config", help="path to a run config (JSON)")
    p_swp.add_argument("--out", type=str, default="runs/sweep",
                       help="output directory (CSV, JSON, SVG)")
    p_swp.add_argument("--json", action="store_true")
    p_swp.set_defaults(func=cmd_sweep)

    p_ver = sub.add_parser("verify", help="runtime self-checks")
    p_ver.add_argument("suite", choices=sorted(SUITES),
                       help="which suite to run")
    p_ver.add_argument("--json", action="store_true")
    p_ver.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
