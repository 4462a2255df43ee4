"""Green's function of the one-dimensional Klein-Gordon waveguide.

Exact, contour-integral, asymptotic and finite-difference evaluations of the
field radiated by an impulsive point source on an elastically anchored cord.
"""

from .dispersion import (
    DomainError,
    Region,
    SaddleData,
    SpacetimePoint,
    TubeCoordinate,
    WaveguideParams,
    group_velocity,
    plane_to_tube,
    saddle_points,
    sample_diagram,
    spacetime_to_hyperbolic,
    tube_to_plane,
    wavenumber_branch,
)
from .fdtd import FdtdConfig, convergence_study, simulate
from .field import FieldMethod, FieldSample, FieldSettings, evaluate
from .specfun import bessel_j0, exact_field

__version__ = "0.1.0"

__all__ = [
    "DomainError", "Region", "SaddleData", "SpacetimePoint", "TubeCoordinate",
    "WaveguideParams", "group_velocity", "plane_to_tube", "saddle_points", "sample_diagram",
    "spacetime_to_hyperbolic", "tube_to_plane", "wavenumber_branch", "FdtdConfig",
    "convergence_study", "simulate", "FieldMethod", "FieldSample", "FieldSettings", "evaluate",
    "bessel_j0", "exact_field", "__version__",
]
