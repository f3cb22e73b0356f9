"""Null-path optics in five-dimensional metrics.

Assemble and slice 5D metrics, integrate null geodesics and their charged
4D projections, evaluate microcanonical and canonical path-sum kernels on
lattices, and check the standard quantum, diffusive, and relativistic
reductions.
"""

__version__ = "0.1.0"

from . import curvature, geodesics, geometry, kernels, kg, limits, sr5
from .errors import NullOpticsError

__all__ = [
    "curvature",
    "geodesics",
    "geometry",
    "kernels",
    "kg",
    "limits",
    "sr5",
    "NullOpticsError",
    "__version__",
]
