"""Numerical laboratory for lifespan bounds of a dissipative NLS model.

The package splits into a closed-form side (exponents, cutoff
construction, bound constants) and an empirical side (pseudospectral
solver, weak-form checks, epsilon sweeps); the CLI in nlslab.cli ties
the two together.
"""

from .exponents import (CaseBranch, CaseTag, ExponentSet, InadmissibleParams,
                        ProblemParams, ValidationReport, compute_exponents,
                        select_case, validate_params)
from .cutoffs import (SpaceTimeCutoff, SpatialCutoff, TemporalCutoff,
                      a_closed, b_closed, compute_l1_norm, compute_mu,
                      make_spatial_cutoff)
from .bounds import (BoundConstants, OutOfRegimeError, build_constants,
                     lifespan_lower, lifespan_upper, min_d)
from .solver import (ComplexField, Grid, InitialDataSpec, LifespanRecord,
                     SolverSettings, TrajectoryLog, evolve_until_blowup,
                     make_initial_data)
from .weakform import (check_absorption_bound, check_identity,
                       check_inequality, eval_i_r, eval_j_r)
from .config import RunConfig, load_config, save_config
from .sweep import SweepResult, run_point, run_sweep

__version__ = "0.1.0"

__all__ = [
    "CaseBranch", "CaseTag", "ExponentSet", "ProblemParams",
    "ValidationReport", "compute_exponents", "select_case", "validate_params",
    "SpaceTimeCutoff", "SpatialCutoff", "TemporalCutoff", "a_closed",
    "b_closed", "compute_l1_norm", "compute_mu", "make_spatial_cutoff",
    "BoundConstants", "InadmissibleParams", "OutOfRegimeError",
    "build_constants", "lifespan_lower", "lifespan_upper", "min_d",
    "ComplexField", "Grid", "InitialDataSpec", "LifespanRecord",
    "SolverSettings", "TrajectoryLog", "evolve_until_blowup",
    "make_initial_data",
    "check_absorption_bound", "check_identity", "check_inequality",
    "eval_i_r", "eval_j_r",
    "RunConfig", "load_config", "save_config",
    "SweepResult", "run_point", "run_sweep",
    "__version__",
]
