"""Physical scales and species presets.

Every closed form in this package depends on mass and Planck's constant only
through dimensionless groups such as ``sqrt(t / (m hbar)) * (p - m x / t)``,
so a :class:`PhysicalScale` simply carries ``m`` and ``hbar``.  In natural
mode both are one; in SI mode positions are metres, times seconds and
momenta kg m/s.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from scipy import constants

from .errors import DomainError

ATOMIC_MASS = constants.atomic_mass
HBAR = constants.hbar
H_PLANCK = constants.h
K_BOLTZMANN = constants.k

SPECIES_MASS_U = {
    "argon": 39.948,
    "sodium": 22.98976928,
    "neutron": 1.00866491595,
}


class UnitMode(enum.Enum):
    NATURAL = "natural"
    SI = "si"


@dataclass(frozen=True)
class PhysicalScale:
    """Mass and reduced Planck constant used to evaluate the formulas."""

    mass: float = 1.0
    hbar: float = 1.0
    mode: UnitMode = UnitMode.NATURAL
    k_boltzmann: float = 1.0

    def __post_init__(self):
        if not (self.mass > 0 and math.isfinite(self.mass)):
            raise DomainError(f"mass must be positive and finite, got {self.mass!r}")
        if not (self.hbar > 0 and math.isfinite(self.hbar)):
            raise DomainError(f"hbar must be positive and finite, got {self.hbar!r}")

    @classmethod
    def natural(cls) -> "PhysicalScale":
        return cls()

    @classmethod
    def si(cls, mass: float) -> "PhysicalScale":
        return cls(mass=mass, hbar=HBAR, mode=UnitMode.SI, k_boltzmann=K_BOLTZMANN)

    @classmethod
    def species(cls, name: str) -> "PhysicalScale":
        try:
            mass_u = SPECIES_MASS_U[name.lower()]
        except KeyError:
            known = ", ".join(sorted(SPECIES_MASS_U))
            raise DomainError(f"unknown species {name!r}; known: {known}") from None
        return cls.si(mass_u * ATOMIC_MASS)

    @property
    def h(self) -> float:
        return 2.0 * math.pi * self.hbar

    def momentum(self, velocity: float) -> float:
        return self.mass * velocity

    def energy(self, p):
        return p * p / (2.0 * self.mass)

    def action_ratio(self, p0: float, tau: float) -> float:
        """Dimensionless phase ``S / hbar = tau p0**2 / (2 m hbar)``."""
        return tau * p0 * p0 / (2.0 * self.mass * self.hbar)

    def crossover_time(self, p0: float) -> float:
        """Time for a classical particle to cross one de Broglie wavelength."""
        return self.h * self.mass / (p0 * p0)


NATURAL = PhysicalScale()
ARGON = PhysicalScale.species("argon")
