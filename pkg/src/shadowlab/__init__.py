"""Windowed least-squares-shadowing sensitivity analysis for chaotic ODEs.

Computes derivatives of long-time-averaged outputs with respect to system
parameters by solving a minimum-norm linearized two-point problem along a
stored trajectory and forming a window-tapered time average, in both tangent
and adjoint form.  Conventional tangent/adjoint sensitivities diverge for
chaotic systems; this formulation stays bounded and converges as the
averaging horizon grows.
"""

from .adjoint import AdjointSolution, adjoint_sensitivity, solve_adjoint
from .blocktridiag import BlockTridiagonalSystem, solve_block_tridiagonal
from .errors import (
    ConfigError,
    GridMismatch,
    NonFiniteState,
    NotPositiveDefinite,
    ShadowlabError,
    SolverFailure,
    UnknownWindow,
)
from .integrate import (
    Trajectory,
    integrate_trajectory,
    one_step_residuals,
    read_trajectory_csv,
    time_average,
    trapezoidal_step,
    truncate_trajectory,
    write_trajectory_csv,
)
from .system import (
    DynamicalSystem,
    LorenzParams,
    linear_test_system,
    lorenz_f,
    lorenz_fs,
    lorenz_fu,
    lorenz_output,
    lorenz_output_grad,
    lorenz_output_param_grad,
    lorenz_system,
)
from .tangent import (
    SensitivityReport,
    TangentSolution,
    solve_tangent,
    tangent_sensitivity,
    write_envelope_csv,
)
from .window import WINDOW_NAMES, WindowFunction, make_window, windowed_average

__version__ = "0.1.0"

__all__ = [
    "AdjointSolution",
    "BlockTridiagonalSystem",
    "ConfigError",
    "DynamicalSystem",
    "GridMismatch",
    "LorenzParams",
    "NonFiniteState",
    "NotPositiveDefinite",
    "SensitivityReport",
    "ShadowlabError",
    "SolverFailure",
    "TangentSolution",
    "Trajectory",
    "UnknownWindow",
    "WINDOW_NAMES",
    "WindowFunction",
    "adjoint_sensitivity",
    "integrate_trajectory",
    "linear_test_system",
    "lorenz_f",
    "lorenz_fs",
    "lorenz_fu",
    "lorenz_output",
    "lorenz_output_grad",
    "lorenz_output_param_grad",
    "lorenz_system",
    "make_window",
    "one_step_residuals",
    "read_trajectory_csv",
    "solve_adjoint",
    "solve_block_tridiagonal",
    "solve_tangent",
    "tangent_sensitivity",
    "time_average",
    "trapezoidal_step",
    "truncate_trajectory",
    "windowed_average",
    "write_envelope_csv",
    "write_trajectory_csv",
]
