#!/usr/bin/env python3
"""Single reference blow-up run plus the weak-form checks.

Runs the focusing reference problem (n=1, p=2, k=1.5, lambda=i) at
epsilon=0.5 on a box wide enough to keep the boundary quiet, with dense
snapshots so the time-trapezoid error in the identity stays small.
Prints the detection record and one inequality report per radius.
"""

import argparse
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from nlslab.bounds import build_constants, jr_lower
from nlslab.config import (GridConfig, RunConfig, SolverConfig,
                           make_params, make_spatial, save_config)
from nlslab.cutoffs import SpaceTimeCutoff, TemporalCutoff
from nlslab.sweep import run_single
from nlslab.weakform import check_absorption_bound, check_inequality


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, default=0.5)
    ap.add_argument("--theta", type=float, default=20.0)
    ap.add_argument("--radii", type=float, nargs="+", default=[2.0, 5.0, 10.0])
    ap.add_argument("--out", type=pathlib.Path,
                    default=pathlib.Path("runs/reference-blowup"))
    args = ap.parse_args()

    cfg = RunConfig(
        grid=GridConfig(N=4096, L=80.0),
        solver=SolverConfig(dt0=0.0025, snapshot_stride=1, max_steps=400_000),
    )
    args.out.mkdir(parents=True, exist_ok=True)
    save_config(cfg, args.out / "config.json")

    record, traj = run_single(cfg, args.eps)
    print(f"epsilon={args.eps}  T_detected={record.T_detected:.6f}  "
          f"reason={record.reason}  steps={record.steps}  "
          f"boundary_clean={record.boundary_clean}")

    params = make_params(cfg, epsilon=args.eps)
    spatial = make_spatial(cfg)
    consts = build_constants(params, spatial, theta=args.theta)

    # Same physical window for every R: eta(t / R^2 / T_R) = eta(t / horizon).
    horizon = 0.9 * traj.end_time()
    for r_val in args.radii:
        t_window = horizon / r_val ** 2
        cutoff = SpaceTimeCutoff(
            spatial,
            TemporalCutoff(theta=args.theta, S=0.25 * t_window, T=t_window),
            R=r_val,
        )
        rep = check_inequality(traj, cutoff)
        floor = jr_lower(r_val, args.eps, consts)
        print(f"R={r_val:<6g} identity_residual={rep.identity_residual:.3e}  "
              f"slack/rhs={rep.slack / rep.rhs:+.3e}  "
              f"J_R={rep.J_R:.6f} (floor {floor:.6f})  "
              f"lhs={rep.lhs:.6f}  rhs={rep.rhs:.6f}")

    absorb = check_absorption_bound(traj, spatial, theta=args.theta,
                                    radii=(2.0, 4.0, 8.0))
    print(f"absorption: all_within={absorb.all_within}  "
          f"decay_monotone={absorb.decay_monotone}")
    for row in absorb.rows:
        print(f"  R={row.R:<6g} scaled_decay={row.scaled_decay:.6e}")

    return 0 if absorb.all_within and absorb.decay_monotone else 1


if __name__ == "__main__":
    raise SystemExit(main())
