"""Semi-infinite shutter solutions and the Cornu-spiral picture of their fringes.

A plane wave ``exp(ipx) + R exp(-ipx)`` confined to ``x < 0`` is released at
``t = 0``.  Its free evolution is a combination of Faddeyeva functions; for
``R = 0`` the density depends on ``(x, t, p, m, hbar)`` only through the
single variable ``theta`` and traces half the squared distance from
``(-1/2, -1/2)`` on the Cornu spiral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import DomainError
from .special_functions import ContourSide, faddeyeva_w, fresnel_cs, gauss_pole_term
from .units import NATURAL, PhysicalScale


@dataclass(frozen=True)
class ShutterState:
    """Initial state ``(exp(i p0 x / hbar) + R exp(-i p0 x / hbar)) Theta(-x)``."""

    reflectivity: float = 0.0
    p0: float = 1.0
    scale: PhysicalScale = NATURAL

    def __post_init__(self):
        if not self.p0 > 0:
            raise DomainError("p0 must be positive")
        if not math.isfinite(self.reflectivity):
            raise DomainError("reflectivity must be finite")


@dataclass(frozen=True)
class SpaceTimePoint:
    x: float
    t: float


def _check_times(t, strict=True):
    t = np.asarray(t, dtype=float)
    bad = t <= 0 if strict else t < 0
    if np.any(bad) or not np.all(np.isfinite(t)):
        raise DomainError("time must be positive and finite")
    return t


def u_of(p, t, x, scale: PhysicalScale = NATURAL):
    """``u(p, t) = (1+i)/2 sqrt(t / (m hbar)) (p - m x / t)``.

    `p` may be complex (evanescent momenta in apodized pulses).
    """
    t = _check_times(t)
    m, hbar = scale.mass, scale.hbar
    return (0.5 + 0.5j) * np.sqrt(t / (m * hbar)) * (np.asarray(p) - m * np.asarray(x, dtype=float) / t)


def theta_of(p, t, x, scale: PhysicalScale = NATURAL):
    """Cornu variable ``theta = sqrt(t / (m hbar pi)) (p - m x / t)``."""
    t = _check_times(t)
    m, hbar = scale.mass, scale.hbar
    return np.sqrt(t / (m * hbar * math.pi)) * (p - m * np.asarray(x, dtype=float) / t)


def free_phase(x, t, scale: PhysicalScale = NATURAL):
    """``exp(i m x^2 / (2 t hbar))``."""
    x = np.asarray(x, dtype=float)
    return np.exp(1j * scale.mass * x * x / (2.0 * t * scale.hbar))


def moshinsky_psi(state: ShutterState, x, t):
    """Released wave ``psi_p^(R)(x, t)``.

    ``exp(i m x^2 / 2 t hbar) / 2 * (w[-u(p, t)] + R w[-u(-p, t)])``.
    Vectorised over `x` and `t`; the density is relative (never normalised).
    """
    t = _check_times(t)
    s = state.scale
    plus = faddeyeva_w(-u_of(state.p0, t, x, s))
    out = plus
    if state.reflectivity != 0:
        out = plus + state.reflectivity * faddeyeva_w(-u_of(-state.p0, t, x, s))
    return 0.5 * free_phase(x, t, s) * out


def cornu_density(theta):
    """``P(theta) = ((C + 1/2)^2 + (S + 1/2)^2) / 2``."""
    c, s = fresnel_cs(theta)
    return 0.5 * ((c + 0.5) ** 2 + (s + 0.5) ** 2)


def cornu_spiral_samples(theta_min, theta_max, n):
    """Rows ``(C, S, P)`` on ``n`` evenly spaced values of theta.

    Returns
    -------
    theta : ndarray, shape (n,)
    rows : ndarray, shape (n, 3)
    """
    if n < 2 or not theta_min < theta_max:
        raise DomainError("need n >= 2 and theta_min < theta_max")
    theta = np.linspace(theta_min, theta_max, int(n))
    c, s = fresnel_cs(theta)
    p = 0.5 * ((c + 0.5) ** 2 + (s + 0.5) ** 2)
    return theta, np.column_stack([c, s, p])


def fringe_trajectory(state: ShutterState, theta_star, t):
    """Position ``x(t) = p t / m - sqrt(pi hbar t / m) theta*`` of constant density."""
    t = _check_times(t)
    m, hbar = state.scale.mass, state.scale.hbar
    return state.p0 * t / m - np.sqrt(math.pi * hbar * t / m) * theta_star


def source_psi(p0, x, t, scale: PhysicalScale = NATURAL):
    """Half-line wave emitted by ``psi(0, t) = exp(-i omega t) Theta(t)``.

    Evaluated as the Fourier integral over the source spectrum, i.e. two
    Gaussian-pole contour integrals passing above ``p = +-p0``.
    """
    t = _check_times(t)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("the source solution is defined for x >= 0")
    return _source_block(p0, x, t, scale)


def _source_block(p0, x, t, scale):
    a = t / (2.0 * scale.mass * scale.hbar)
    b = x / scale.hbar
    total = gauss_pole_term(a, b, p0, ContourSide.ABOVE_POLES)
    total = total + gauss_pole_term(a, b, -np.asarray(p0), ContourSide.ABOVE_POLES)
    return 0.5j / math.pi * total


class CornuExtrema(NamedTuple):
    theta_max: float
    theta_min: float
    p_max: float
    p_min: float

    @property
    def visibility(self):
        return (self.p_max - self.p_min) / (self.p_max + self.p_min)


def _refine(f, theta0, step):
    res = minimize_scalar(f, bounds=(theta0 - step, theta0 + step), method="bounded",
                          options={"xatol": 1e-10})
    return float(res.x)


def cornu_extrema(lo=0.5, hi=2.5, step=0.01) -> CornuExtrema:
    """First maximum and following minimum of :func:`cornu_density` on ``[lo, hi]``.

    A grid scan with spacing `step` brackets the extrema, which are then
    polished by bounded scalar minimisation.
    """
    grid = np.arange(lo, hi + 0.5 * step, step)
    dens = cornu_density(grid)
    i_max = int(np.argmax(dens))
    i_min = i_max + int(np.argmin(dens[i_max:]))
    th_max = _refine(lambda th: -cornu_density(th), grid[i_max], step)
    th_min = _refine(cornu_density, grid[i_min], step)
    return CornuExtrema(th_max, th_min, float(cornu_density(th_max)), float(cornu_density(th_min)))


def fringe_width_theta(level=1.0):
    """Width in theta of the main fringe where it exceeds the classical density `level`."""
    ext = cornu_extrema()
    f = lambda th: cornu_density(th) - level
    left = brentq(f, 0.0, ext.theta_max, xtol=1e-12)
    right = brentq(f, ext.theta_max, ext.theta_min, xtol=1e-12)
    return right - left


def fringe_width(t, scale: PhysicalScale = NATURAL):
    """Main-fringe width in space, ``Delta theta * sqrt(pi hbar t / m)``."""
    t = _check_times(t)
    return fringe_width_theta() * np.sqrt(math.pi * scale.hbar * t / scale.mass)
