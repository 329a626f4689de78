"""Crank-Nicolson propagation of the free Schroedinger equation on a 1-D grid."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np
from scipy.linalg import solve_banded
from scipy.special import erfc

from ..errors import DomainError, PropagationError
from ..units import NATURAL, PhysicalScale


@dataclass(frozen=True)
class Dirichlet:
    """Hard walls just outside both ends of the grid."""


@dataclass(frozen=True)
class Absorbing:
    """Quartic imaginary potential ramps of the given width at both ends.

    ``strength`` is the depth of ``-i V`` at the outer edge, in units of
    ``hbar**2 / (m width**2)``.  The default only damps slow waves over a
    short run; use :meth:`for_momentum` when the outgoing flux must vanish.
    """

    width: float
    strength: float = 40.0

    @classmethod
    def for_momentum(cls, p, scale: PhysicalScale = NATURAL):
        """Layer with reflected amplitude below ~1e-6 at carrier momentum `p`.

        The ramp spans 40 reduced wavelengths so it reflects little, and its
        depth ``40 hbar v / width`` attenuates the round trip by ~e^-16.
        """
        k = abs(p) / scale.hbar
        if not k > 0:
            raise DomainError("carrier momentum must be nonzero")
        width = 40.0 / k
        return cls(width, 40.0 * k * width)


@dataclass(frozen=True)
class ShutterSchedule:
    """Hard wall at ``position`` that is absent on ``[open_time, close_time)``."""

    open_time: float = 0.0
    close_time: float = math.inf
    position: float = 0.0

    def closed_at(self, t):
        return t < self.open_time or t >= self.close_time


@dataclass(frozen=True)
class GridState:
    x_min: float
    x_max: float
    n: int
    dt: float
    psi: np.ndarray = field(repr=False)
    boundary: Union[Dirichlet, Absorbing] = Dirichlet()
    t: float = 0.0
    scale: PhysicalScale = NATURAL

    def __post_init__(self):
        if self.n < 16:
            raise DomainError("grid needs at least 16 points")
        if not self.dt > 0:
            raise DomainError("dt must be positive")
        if not self.x_max > self.x_min:
            raise DomainError("x_max must exceed x_min")
        if len(self.psi) != self.n:
            raise DomainError("psi length does not match n")
        if isinstance(self.boundary, Absorbing):
            if not 0 < self.boundary.width < (self.x_max - self.x_min) / 4:
                raise DomainError("absorbing width must be below a quarter of the box")

    @property
    def x(self):
        return np.linspace(self.x_min, self.x_max, self.n)

    @property
    def dx(self):
        return (self.x_max - self.x_min) / (self.n - 1)

    def norm(self):
        return float(np.sum(np.abs(self.psi) ** 2) * self.dx)


def _potential(state):
    v = np.zeros(state.n, dtype=complex)
    if isinstance(state.boundary, Absorbing):
        x = state.x
        w = state.boundary.width
        depth = state.boundary.strength * state.scale.hbar ** 2 / (state.scale.mass * w * w)
        right = x > state.x_max - w
        left = x < state.x_min + w
        v[right] -= 1j * depth * ((x[right] - (state.x_max - w)) / w) ** 4
        v[left] -= 1j * depth * (((state.x_min + w) - x[left]) / w) ** 4
    return v


def _wall_index(state, position):
    i0 = int(round((position - state.x_min) / state.dx))
    if not 0 <= i0 < state.n or abs(state.x_min + i0 * state.dx - position) > 1e-9 * state.dx + 1e-12:
        raise DomainError("the shutter position must coincide with a grid node")
    return i0


def _evolve_segment(psi, state, n_steps, dt, wall_index, first_step):
    m, hbar = state.scale.mass, state.scale.hbar
    kinetic = hbar * hbar / (2.0 * m * state.dx ** 2)
    diag_h = 2.0 * kinetic + _potential(state)
    off_h = np.full(state.n - 1, -kinetic, dtype=complex)
    if wall_index is not None:
        psi = psi.copy()
        psi[wall_index] = 0.0
        if wall_index > 0:
            off_h[wall_index - 1] = 0.0
        if wall_index < state.n - 1:
            off_h[wall_index] = 0.0
    c = 0.5j * dt / hbar
    ab = np.zeros((3, state.n), dtype=complex)
    ab[0, 1:] = c * off_h
    ab[1, :] = 1.0 + c * diag_h
    ab[2, :-1] = c * off_h
    b_diag = 1.0 - c * diag_h
    b_off = -c * off_h
    for step in range(n_steps):
        rhs = b_diag * psi
        rhs[:-1] += b_off * psi[1:]
        rhs[1:] += b_off * psi[:-1]
        psi = solve_banded((1, 1), ab, rhs, check_finite=False)
        if step % 200 == 0 and not np.all(np.isfinite(psi)):
            raise PropagationError("non-finite wavefunction", step=first_step + step)
    if not np.all(np.isfinite(psi)):
        raise PropagationError("non-finite wavefunction", step=first_step + n_steps)
    return psi


def propagate_grid(initial: GridState, t_final: float,
                   shutter: Optional[ShutterSchedule] = None) -> GridState:
    """Propagate ``initial`` to ``t_final`` with Crank-Nicolson steps.

    The scheme is second order in time and space and exactly unitary with
    Dirichlet ends.  With a shutter the propagation is split at the opening
    and closing instants so the wall switches exactly on a step boundary.
    """
    if t_final < initial.t:
        raise DomainError("t_final precedes the initial time")
    marks = [initial.t, t_final]
    if shutter is not None:
        for tm in (shutter.open_time, shutter.close_time):
            if initial.t < tm < t_final:
                marks.append(tm)
    marks = sorted(set(marks))
    psi = np.asarray(initial.psi, dtype=complex)
    steps_done = 0
    for t0, t1 in zip(marks[:-1], marks[1:]):
        n_steps = max(1, int(math.ceil((t1 - t0) / initial.dt - 1e-9)))
        dt = (t1 - t0) / n_steps
        wall = None
        if shutter is not None and shutter.closed_at(0.5 * (t0 + t1)):
            wall = _wall_index(initial, shutter.position)
        psi = _evolve_segment(psi, initial, n_steps, dt, wall, steps_done)
        steps_done += n_steps
    return replace(initial, psi=psi, t=t_final)


def make_grid(x_min, x_max, dx, **kwargs):
    """Grid whose nodes include ``x = 0`` (needed for the shutter wall)."""
    i_lo = int(math.floor(x_min / dx))
    i_hi = int(math.ceil(x_max / dx))
    n = i_hi - i_lo + 1
    return dict(x_min=i_lo * dx, x_max=i_hi * dx, n=n, **kwargs)


def gaussian_packet(x, x0, sigma, p, scale: PhysicalScale = NATURAL):
    """Normalised Gaussian ``(2 pi sigma^2)^(-1/4) exp(-(x-x0)^2 / 4 sigma^2 + i p (x-x0) / hbar)``."""
    x = np.asarray(x, dtype=float)
    amp = (2.0 * math.pi * sigma * sigma) ** -0.25
    return amp * np.exp(-((x - x0) ** 2) / (4.0 * sigma * sigma) + 1j * p * (x - x0) / scale.hbar)


def free_gaussian(x, t, x0, sigma, p, scale: PhysicalScale = NATURAL):
    """Exact free evolution of :func:`gaussian_packet`."""
    m, hbar = scale.mass, scale.hbar
    x = np.asarray(x, dtype=float)
    spread = 1.0 + 1j * hbar * t / (2.0 * m * sigma * sigma)
    amp = (2.0 * math.pi * sigma * sigma) ** -0.25 / np.sqrt(spread)
    centre = x - x0 - p * t / m
    phase = p * (x - x0) / hbar - p * p * t / (2.0 * m * hbar)
    return amp * np.exp(-(centre ** 2) / (4.0 * sigma * sigma * spread) + 1j * phase)


def truncated_plane_wave(x, p, reflectivity=0.0, ramp=None, back_edge=None, back_width=1.0,
                         scale: PhysicalScale = NATURAL):
    """``(exp(ipx) + R exp(-ipx))`` on ``x < 0`` with smoothed edges.

    The cut at the origin is an erf ramp ``erfc(x / ramp) / 2`` (``ramp=None``
    keeps it sharp).  A second, wide erf ramp at ``back_edge`` terminates the
    wave inside the box so the far end does not diffract.
    """
    x = np.asarray(x, dtype=float)
    k = p / scale.hbar
    wave = np.exp(1j * k * x) + reflectivity * np.exp(-1j * k * x)
    if ramp is None:
        window = np.where(x < 0, 1.0, np.where(x == 0, 0.5, 0.0))
    else:
        window = 0.5 * erfc(x / ramp)
    if back_edge is not None:
        window = window * 0.5 * erfc((back_edge - x) / back_width)
    return wave * window


def shutter_release_error(dx, p=2.0, t=1.0, window=(-3.0, 5.0), ramp_cells=2.0, dt_factor=4.0):
    """Relative L2 error of the grid density against the sharp-shutter closed form.

    Natural units.  The initial plane wave ``exp(ipx)`` on ``x < 0`` gets an
    erfc edge ``ramp_cells * dx`` wide and is terminated far behind by a wide
    ramp; the box has absorbing ends.  ``dt = dt_factor * dx**2`` keeps the
    Crank-Nicolson phase error of the edge's short waves under control, so
    both the smoothing and the discretisation error are second order in `dx`.
    """
    from ..shutter import ShutterState, moshinsky_psi

    g = make_grid(-50.0, 50.0, dx, dt=dt_factor * dx * dx, boundary=Absorbing(12.0))
    x = np.linspace(g["x_min"], g["x_max"], g["n"])
    psi0 = truncated_plane_wave(x, p, 0.0, ramp=ramp_cells * dx, back_edge=-30.0, back_width=3.0)
    out = propagate_grid(GridState(psi=psi0, **g), t)
    sel = (x >= window[0]) & (x <= window[1])
    exact = np.abs(moshinsky_psi(ShutterState(0.0, p), x[sel], t)) ** 2
    num = np.abs(out.psi[sel]) ** 2
    return float(np.sqrt(np.sum((num - exact) ** 2) / np.sum(exact ** 2)))
