"""laddersolve: families of distinct solutions via zero-ladder truncation.

The library truncates a nonlinearity to the windows between consecutive
zeros of a declared ladder, minimizes each truncated energy, and
certifies every claim numerically: window membership, energy
negativity, contraction rates, uniform bounds and residuals.  Three
problem classes share the machinery: semilinear elliptic Dirichlet
problems, gradient-dependent elliptic problems through a frozen-
gradient Picard scheme, and periodic Hamiltonian systems on expanding
intervals.
"""

from .errors import (
    ConfigurationError,
    HypothesisViolationError,
    LadderSolveError,
    NumericError,
    UsageError,
)
from .grid import (
    DIRICHLET_1D,
    DIRICHLET_2D,
    PERIODIC_1D,
    Grid,
    GridFunction,
    build_grid,
    first_eigenvalue,
    gradient_midpoint,
    neg_laplacian_apply,
    norm,
)
from .nonlinearity import (
    MINUS,
    PLUS,
    ConvectionSpec,
    HamiltonianSpec,
    HypothesisReport,
    NonlinearitySpec,
    TruncatedNonlinearity,
    ZeroLadder,
    load_builtin,
    truncate,
    truncated_antiderivative,
    validate_hypotheses,
)
from .variational import (
    MinimizeOptions,
    MinimizeResult,
    SolutionCertificate,
    assemble_energy,
    assemble_gradient,
    ladder_walk,
    minimize,
    solve_window,
)
from .convection import (
    IterationTrace,
    contraction_bound,
    frozen_solve,
    ladder_walk_convection,
    picard_iterate,
)
from .hamiltonian import (
    AlphaGate,
    ConvergenceReport,
    alpha_threshold,
    family_solve,
    limit_study,
    solve_periodic_window,
)
from .verify import (
    OracleSolution,
    distinctness_report,
    fd_gradient_check,
    residual_norm,
    shooting_oracle_1d,
    window_certificate,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "HypothesisViolationError",
    "LadderSolveError",
    "NumericError",
    "UsageError",
    "DIRICHLET_1D",
    "DIRICHLET_2D",
    "PERIODIC_1D",
    "Grid",
    "GridFunction",
    "build_grid",
    "first_eigenvalue",
    "gradient_midpoint",
    "neg_laplacian_apply",
    "norm",
    "MINUS",
    "PLUS",
    "ConvectionSpec",
    "HamiltonianSpec",
    "HypothesisReport",
    "NonlinearitySpec",
    "TruncatedNonlinearity",
    "ZeroLadder",
    "load_builtin",
    "truncate",
    "truncated_antiderivative",
    "validate_hypotheses",
    "MinimizeOptions",
    "MinimizeResult",
    "SolutionCertificate",
    "assemble_energy",
    "assemble_gradient",
    "ladder_walk",
    "minimize",
    "solve_window",
    "IterationTrace",
    "contraction_bound",
    "frozen_solve",
    "ladder_walk_convection",
    "picard_iterate",
    "AlphaGate",
    "ConvergenceReport",
    "alpha_threshold",
    "family_solve",
    "limit_study",
    "solve_periodic_window",
    "OracleSolution",
    "distinctness_report",
    "fd_gradient_check",
    "residual_norm",
    "shooting_oracle_1d",
    "window_certificate",
    "__version__",
]
