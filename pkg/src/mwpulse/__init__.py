"""Matter-wave pulses from sharp and apodized shutters.

Closed forms built on the Faddeyeva function for released plane waves,
finite pulses and their mixtures, with independent numerical oracles.
"""

__version__ = "0.1.0"

from .errors import (
    AccuracyError,
    DegenerateInputError,
    DomainError,
    MatterWaveError,
    PropagationError,
    RangeError,
)
from .units import ARGON, NATURAL, PhysicalScale
from .special_functions import faddeyeva_w, fresnel_cs, gauss_pole_integral
from .shutter import ShutterState, cornu_density, cornu_extrema, moshinsky_psi, source_psi
from .pulse import (
    PulseSpec,
    evolve_pulse_exact,
    evolve_pulse_spectral,
    overlap_probability,
    source_pulse,
)
from .ensembles import MomentumDistribution, mixture_density, purity, visibility
from .apodization import ApertureWindow, WindowKind, apodized_pulse, uncertainty_product

__all__ = [
    "ARGON", "NATURAL", "AccuracyError", "ApertureWindow", "DegenerateInputError",
    "DomainError", "MatterWaveError", "MomentumDistribution", "PhysicalScale",
    "PropagationError", "PulseSpec", "RangeError", "ShutterState", "WindowKind",
    "apodized_pulse", "cornu_density", "cornu_extrema", "evolve_pulse_exact",
    "evolve_pulse_spectral", "faddeyeva_w", "fresnel_cs", "gauss_pole_integral",
    "mixture_density", "moshinsky_psi", "overlap_probability", "purity", "source_psi",
    "source_pulse", "uncertainty_product", "visibility",
]
