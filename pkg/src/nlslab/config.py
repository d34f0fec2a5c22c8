"""Run configuration: one nested dataclass tree, JSON round-trippable.

Every experiment entry point takes a RunConfig so that a run directory
can carry its exact provenance.  Round trips are lossless: floats are
serialized with shortest-repr and tuples are restored on load.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from typing import Optional, Tuple

from .cutoffs import SpatialCutoff, make_spatial_cutoff
from .exponents import ProblemParams, select_case
from .solver import Grid, InitialDataSpec, SolverSettings

WORKERS_ENV = "NLSLAB_WORKERS"


def _default_eps_grid() -> Tuple[float, ...]:
    # Geometric grid, half-decade per two points: 0.5 * 2^(-j/2).
    return tuple(0.5 * 2.0 ** (-j / 2.0) for j in range(10))


@dataclass(frozen=True)
class ProblemConfig:
    n: int = 1
    p: float = 2.0
    lambda_re: float = 0.0
    lambda_im: float = 1.0
    k: float = 1.5


@dataclass(frozen=True)
class GridConfig:
    N: int = 2048
    L: float = 40.0


@dataclass(frozen=True)
class CutoffConfig:
    nu: float = 1.0
    theta: float = 20.0


@dataclass(frozen=True)
class ThresholdConfig:
    amplitude: float = 1e6
    mass_factor: float = 1e3
    dt_min: float = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    dt0: float = 0.01
    c_cfl: float = 0.1
    thresholds: ThresholdConfig = field(default_factory=ThresholdConfig)
    snapshot_stride: int = 0
    max_steps: int = 1_000_000


@dataclass(frozen=True)
class DataConfig:
    amplitude_scale: float = 1.0


@dataclass(frozen=True)
class SweepConfig:
    eps_grid: Tuple[float, ...] = field(default_factory=_default_eps_grid)
    workers: int = 1
    refine: bool = True
    refine_tol: float = 0.05
    min_clean: int = 5
    base_margin: float = 0.25


@dataclass(frozen=True)
class RunConfig:
    problem: ProblemConfig = field(default_factory=ProblemConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    cutoff: CutoffConfig = field(default_factory=CutoffConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    data: DataConfig = field(default_factory=DataConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    seed: int = 0

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


def config_from_dict(d: dict) -> RunConfig:
    sweep_d = dict(d.get("sweep", {}))
    if "eps_grid" in sweep_d:
        sweep_d["eps_grid"] = tuple(sweep_d["eps_grid"])
    solver_d = dict(d.get("solver", {}))
    if "thresholds" in solver_d:
        solver_d["thresholds"] = ThresholdConfig(**solver_d["thresholds"])
    return RunConfig(
        problem=ProblemConfig(**d.get("problem", {})),
        grid=GridConfig(**d.get("grid", {})),
        cutoff=CutoffConfig(**d.get("cutoff", {})),
        solver=SolverConfig(**solver_d),
        data=DataConfig(**d.get("data", {})),
        sweep=SweepConfig(**sweep_d),
        seed=d.get("seed", 0))


def config_from_json(text: str) -> RunConfig:
    return config_from_dict(json.loads(text))


def load_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_json(fh.read())


def save_config(cfg: RunConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(cfg.to_json() + "\n")


def effective_workers(cfg: RunConfig) -> int:
    """Worker count, overridable through the environment."""
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return max(1, cfg.sweep.workers)
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}")


# ---------------------------------------------------------------------------
# builders


def make_params(cfg: RunConfig, epsilon: float = 1.0) -> ProblemParams:
    pc = cfg.problem
    return ProblemParams(n=pc.n, p=pc.p, lambda_re=pc.lambda_re,
                         lambda_im=pc.lambda_im, k=pc.k, epsilon=epsilon)


def make_grid(cfg: RunConfig, refine_factor: int = 1) -> Grid:
    return Grid(n=cfg.problem.n, N=cfg.grid.N * refine_factor, L=cfg.grid.L)


def make_settings(cfg: RunConfig,
                  snapshot_stride: Optional[int] = None) -> SolverSettings:
    sc = cfg.solver
    return SolverSettings(
        dt0=sc.dt0, c_cfl=sc.c_cfl,
        amp_threshold=sc.thresholds.amplitude,
        mass_factor=sc.thresholds.mass_factor,
        dt_min=sc.thresholds.dt_min,
        snapshot_stride=(sc.snapshot_stride if snapshot_stride is None
                         else snapshot_stride),
        max_steps=sc.max_steps)


def make_data_spec(cfg: RunConfig) -> InitialDataSpec:
    case = select_case(make_params(cfg))
    return InitialDataSpec(k=cfg.problem.k, case=case,
                           amplitude_scale=cfg.data.amplitude_scale)


def make_spatial(cfg: RunConfig) -> SpatialCutoff:
    return make_spatial_cutoff(nu=cfg.cutoff.nu, n=cfg.problem.n)
