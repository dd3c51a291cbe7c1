"""Numerical verification tools for the rotating Navier-Stokes equations.

Torus solver (spectral core, exact rotating Stokes semigroup, exponential
integrators), whole-space evaluators of the linear flow, and decay-rate
experiment drivers.
"""

__version__ = "0.1.0"
