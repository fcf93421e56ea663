"""Conservative finite element solvers for the 2D Schrodinger-Poisson equation.

The library discretizes

    i u_t = -alpha Lap(u) + beta Phi u + V(x) u + |u|^2 u
    -Lap(Phi) = mu (|u|^2 - c)

on a rectangle with homogeneous Dirichlet conditions, using Q1/Q2 Lagrange
elements on uniform quad meshes. Two time steppers are provided: a relaxation
scheme whose auxiliary density variable keeps every solve linear while
conserving the discrete mass and a staggered modified energy exactly (up to
solver residual), and a fixed-point Crank-Nicolson baseline for accuracy and
timing comparisons.
"""

from .errors import ConfigurationError, NonConvergence, SolveFailure
from .mesh import RectDomain, StructuredQuadMesh, boundary_vertices, build_mesh, refine
from .fespace import (
    FeSpace,
    Field,
    QkBasis,
    QuadratureRule,
    eval_at_points,
    eval_basis,
    eval_field,
    eval_field_at_quad,
    eval_on_refined,
    interpolate,
    make_quadrature,
    zero_boundary,
)
from .assembly import (
    assemble_density_load,
    assemble_mass,
    assemble_stiffness,
    assemble_weighted_mass,
    build_reduction,
    dirichlet_reduce,
)
from .linsolve import PatternSolver, SolveReport, SolverConfig, reuse_pattern_solve, solve_complex, solve_spd
from .scheme import (
    Operators,
    ProblemSpec,
    SchemeState,
    StepArtifacts,
    constant_coefficient_problem,
    full_problem,
    init,
    run,
    step,
)
from .baseline import IterationPolicy, IterationStats, run_iterative, step_iterative
from . import diagnostics
from .diagnostics import (
    DiagnosticsRecord,
    MassOnlyRecorder,
    Recorder,
    convergence_orders,
    mass,
    modified_energy,
    original_energy,
    two_level_error_space,
    two_level_error_time,
)

__version__ = "0.1.0"

from .config import RunSetup, apply_overrides, load_config, resolve  # noqa: E402

__all__ = [
    "ConfigurationError",
    "SolveFailure",
    "NonConvergence",
    "RectDomain",
    "StructuredQuadMesh",
    "boundary_vertices",
    "build_mesh",
    "refine",
    "FeSpace",
    "Field",
    "QkBasis",
    "QuadratureRule",
    "eval_basis",
    "eval_field",
    "eval_field_at_quad",
    "eval_at_points",
    "eval_on_refined",
    "interpolate",
    "make_quadrature",
    "zero_boundary",
    "assemble_mass",
    "assemble_stiffness",
    "assemble_weighted_mass",
    "assemble_density_load",
    "build_reduction",
    "dirichlet_reduce",
    "SolverConfig",
    "SolveReport",
    "PatternSolver",
    "solve_spd",
    "solve_complex",
    "reuse_pattern_solve",
    "ProblemSpec",
    "SchemeState",
    "StepArtifacts",
    "Operators",
    "full_problem",
    "constant_coefficient_problem",
    "init",
    "step",
    "run",
    "IterationPolicy",
    "IterationStats",
    "step_iterative",
    "run_iterative",
    "diagnostics",
    "DiagnosticsRecord",
    "Recorder",
    "MassOnlyRecorder",
    "mass",
    "modified_energy",
    "original_energy",
    "two_level_error_time",
    "two_level_error_space",
    "convergence_orders",
    "RunSetup",
    "load_config",
    "apply_overrides",
    "resolve",
    "__version__",
]
