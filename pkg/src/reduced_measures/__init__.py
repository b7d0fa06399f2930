"""Finite-volume laboratory for semilinear elliptic problems with
measure data: truncation and mollification limits, reduced-measure
extraction, measure calculus, and discrete capacities."""

from ._kernels import USING_NUMBA
from .grids import Grid, GridFunction, LinearOperator, build_grid, integrate, negative_laplacian
from .measures import DiscreteMeasure, tv_distance, tv_norm
from .nonlinearities import (
    Nonlinearity,
    make_exponential,
    make_power,
    make_two_sided_exponential,
)
from .solver import (
    SolveReport,
    assemble_rhs,
    check_apriori_estimates,
    compare_solutions,
    solve_linear,
    solve_semilinear,
)
from .reduction import (
    ReducedResult,
    calculus_check,
    goodness_test,
    mollification_schedule,
    oracle_reduced,
    reduce_by_mollification,
    reduce_by_truncation,
    reduce_signed,
    split_residual,
    truncation_schedule,
    weak_l1_stability_experiment,
)
from .capacity import (
    CompactSet,
    ball_set,
    cap_h1,
    construct_psi,
    lower_bound_check,
    point_set,
)
from .config import ConfigError, ExperimentConfig
from .verify import CheckResult, run_all, run_suite

__version__ = "0.1.0"

__all__ = [
    "USING_NUMBA",
    "Grid",
    "GridFunction",
    "LinearOperator",
    "build_grid",
    "integrate",
    "negative_laplacian",
    "DiscreteMeasure",
    "tv_norm",
    "tv_distance",
    "Nonlinearity",
    "make_power",
    "make_exponential",
    "make_two_sided_exponential",
    "SolveReport",
    "assemble_rhs",
    "solve_linear",
    "solve_semilinear",
    "check_apriori_estimates",
    "compare_solutions",
    "ReducedResult",
    "truncation_schedule",
    "mollification_schedule",
    "reduce_by_truncation",
    "reduce_by_mollification",
    "reduce_signed",
    "split_residual",
    "goodness_test",
    "oracle_reduced",
    "calculus_check",
    "weak_l1_stability_experiment",
    "CompactSet",
    "point_set",
    "ball_set",
    "cap_h1",
    "construct_psi",
    "lower_bound_check",
    "ConfigError",
    "ExperimentConfig",
    "CheckResult",
    "run_suite",
    "run_all",
    "__version__",
]
