"""Numerical lab for the periodic Camassa-Holm equation.

The dynamics are integrated both as a PDE in Eulerian variables and as
geodesic flow on the diffeomorphism group of the circle; the geodesics are
then checked against perturbed paths with the same endpoints.
"""

__version__ = "0.1.0"
