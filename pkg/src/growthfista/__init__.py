"""Composite convex optimization lab: FISTA variants, proximal gradient,
the inertial ODE, and numeric verification of their growth-condition
convergence guarantees."""

from .expcli import __version__, main

__all__ = ["__version__", "main"]
