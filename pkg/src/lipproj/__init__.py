"""Desk-scale numerical laboratory for lower bounds on projections from
Lipschitz-function spaces onto quadratic polynomials over Euclidean balls.

Modules
-------
geometry     orthogonal-group elements, Haar sampling, coordinate reflections
polynomials  quadratic forms with exact sup/Lipschitz norms, homogenisation
witness      the planar bump, its coordinate-pair sums, Lipschitz estimation
averaging    Monte-Carlo and closed-form group averages, coefficient fits
bounds       the arithmetic pipeline producing the fifth-root lower bound
oracle       discrete minimal-projection experiments on finite ball nets
cli          batch command line driving reproducible experiments
"""

from .bounds import BoundReport, closed_form_bound, combined_bound, optimize_combined_bound
from .polynomials import Quadratic
from .witness import WitnessParams

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "Quadratic",
    "WitnessParams",
    "closed_form_bound",
    "combined_bound",
    "optimize_combined_bound",
    "__version__",
]
