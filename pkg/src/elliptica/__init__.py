"""Numerical laboratory for stable and finite-Morse-index solutions of -Δu = f(u)."""

__version__ = "0.1.0"

from .model import (EllipticaError, Nonlinearity, RadialProfile, TestFunction, SpectralReport,
                    GridSolution2D, DecayFit, Disk, Box, BoundaryCondition,
                    make_builtin_nonlinearity, validate_profile)

__all__ = [
    "__version__", "EllipticaError", "Nonlinearity", "RadialProfile", "TestFunction",
    "SpectralReport", "GridSolution2D", "DecayFit", "Disk", "Box", "BoundaryCondition",
    "make_builtin_nonlinearity", "validate_profile",
]
