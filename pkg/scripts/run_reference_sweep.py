#!/usr/bin/env python3
"""Ten-point epsilon sweep on the reference problem.

The box is much wider than the single-run default (L=320, N=16384):
small epsilon means late detection, and the dispersive tail reaches the
boundary well before the mass threshold fires on a 40-wide box.  Even at
this width the three smallest amplitudes go dirty; the fit uses the
clean subset.  Expect a few minutes of runtime, less with
NLSLAB_WORKERS set.

Writes sweep.csv, summary.json and sweep.svg under --out.
"""

import argparse
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from nlslab.cli import main as cli_main
from nlslab.config import GridConfig, RunConfig, save_config


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=pathlib.Path,
                    default=pathlib.Path("runs/reference-sweep"))
    args = ap.parse_args()

    cfg = RunConfig(grid=GridConfig(N=16384, L=320.0))
    args.out.mkdir(parents=True, exist_ok=True)
    cfg_path = args.out / "config.json"
    save_config(cfg, cfg_path)

    return cli_main(["sweep", str(cfg_path), "--out", str(args.out)])


if __name__ == "__main__":
    raise SystemExit(main())
