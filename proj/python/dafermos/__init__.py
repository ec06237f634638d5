"""Self-similar vanishing-viscosity Riemann solutions for coupled hyperbolic models."""

from ._core import (
    ColorProfile,
    ModelError,
    ScalarModel,
    ScalarSolveConfig,
    SolverError,
    SpectralData,
    SpectralError,
    SystemModel,
    SystemSolveConfig,
    __version__,
    exact_scalar_riemann,
    generalized_eigen,
    p_system_preset,
    scalar_as_system,
    scalar_preset,
    scalar_preset_names,
    solve_generalized_eigen,
    solve_scalar,
    solve_system,
)

__all__ = [
    "ColorProfile",
    "ModelError",
    "ScalarModel",
    "ScalarSolveConfig",
    "SolverError",
    "SpectralData",
    "SpectralError",
    "SystemModel",
    "SystemSolveConfig",
    "__version__",
    "exact_scalar_riemann",
    "generalized_eigen",
    "p_system_preset",
    "scalar_as_system",
    "scalar_preset",
    "scalar_preset_names",
    "solve_generalized_eigen",
    "solve_scalar",
    "solve_system",
]
