"""Independent numerical ground truth: quadrature and grid propagation."""

from .grid import (
    Absorbing,
    Dirichlet,
    GridState,
    ShutterSchedule,
    free_gaussian,
    gaussian_packet,
    make_grid,
    propagate_grid,
    shutter_release_error,
    truncated_plane_wave,
)
from .quadrature import (
    QuadratureResult,
    adaptive_integrate,
    gauss_legendre_panels,
    gauss_pole_quadrature,
)

__all__ = [
    "Absorbing",
    "Dirichlet",
    "GridState",
    "QuadratureResult",
    "ShutterSchedule",
    "adaptive_integrate",
    "free_gaussian",
    "gauss_legendre_panels",
    "gauss_pole_quadrature",
    "gaussian_packet",
    "make_grid",
    "propagate_grid",
    "shutter_release_error",
    "truncated_plane_wave",
]
