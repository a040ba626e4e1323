"""Kaczmarz-Tanabe solvers in standard form.

Thin wrapper over the C++ core. Matrices are 2-D float64 arrays, vectors
1-D arrays.
"""

from ._ktsolve import (
    ConfigError,
    ZeroRowError,
    build_C,
    build_Cbar,
    build_Chat,
    compute_H,
    head_phantom,
    kaczmarz_sweep,
    min_norm_lsq,
    project_nullspace,
    run,
    symmetric_sweep,
    tanabe_problem,
    tomo_problem,
)

__all__ = [
    "ConfigError",
    "ZeroRowError",
    "build_C",
    "build_Cbar",
    "build_Chat",
    "compute_H",
    "head_phantom",
    "kaczmarz_sweep",
    "min_norm_lsq",
    "project_nullspace",
    "run",
    "symmetric_sweep",
    "tanabe_problem",
    "tomo_problem",
]
