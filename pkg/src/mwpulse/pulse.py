"""Finite pulses cut by opening the shutter on ``[0, tau]``.

After the shutter closes the wave in ``x > 0`` evolves next to a hard wall,
so its spectral decomposition uses the sine eigenstates
``<x|phi_E> = sqrt(2 m hbar / (pi p)) sin(p x / hbar)``.

Internally every formula is evaluated in units with ``m = hbar = tau = 1``;
positions scale with ``sqrt(hbar tau / m)`` and momenta with
``sqrt(m hbar / tau)``.  The wave amplitude is dimensionless and invariant
under this rescaling.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.special import gamma, sici

from .errors import DegenerateInputError, DomainError
from .oracle.quadrature import adaptive_integrate, gauss_legendre_panels
from .shutter import _source_block, moshinsky_psi, ShutterState
from .special_functions import SQRT_PI, ContourSide, faddeyeva_derivatives, faddeyeva_w
from .units import NATURAL, PhysicalScale

_C = 0.5 + 0.5j          # u0(p, tau) = _C * p in natural units
_TAYLOR_RADIUS = 1e-3    # |c (p - q)| below which the pole expansion is used
_TAYLOR_TERMS = 6
_SERIES_RADIUS = 0.05    # |c p| below which D(p) uses its Maclaurin series
_U_CUTOFF = 6.5          # exp(-6.5^2) ~ 4e-19


@dataclass(frozen=True)
class PulseSpec:
    """Shutter open on ``[0, tau]`` in front of ``exp(ipx) + R exp(-ipx)``."""

    reflectivity: float = 0.0
    p0: float = 1.0
    tau: float = 1.0
    scale: PhysicalScale = NATURAL

    def __post_init__(self):
        if not self.p0 > 0:
            raise DomainError("p0 must be positive")
        if not self.tau > 0:
            raise DomainError("tau must be positive")
        if not math.isfinite(self.reflectivity):
            raise DomainError("reflectivity must be finite")

    @property
    def length_unit(self):
        return math.sqrt(self.scale.hbar * self.tau / self.scale.mass)

    @property
    def momentum_unit(self):
        return math.sqrt(self.scale.mass * self.scale.hbar / self.tau)

    @property
    def action(self):
        """``S / hbar = tau p0^2 / (2 m hbar)``."""
        return self.scale.action_ratio(self.p0, self.tau)

    def natural(self, x, t):
        """``(p0, x, t)`` in units with ``m = hbar = tau = 1``."""
        return (self.p0 / self.momentum_unit,
                np.asarray(x, dtype=float) / self.length_unit,
                np.asarray(t, dtype=float) / self.tau)

    def with_reflectivity(self, r):
        return PulseSpec(r, self.p0, self.tau, self.scale)


class Deformation(enum.Enum):
    STEEPEST_DESCENT = "steepest_descent"
    REAL_LINE = "real_line"


@dataclass(frozen=True)
class ContourSpec:
    """Integration path for the spectral representation.

    The spectral integrand is entire, so `side` does not change the value; it
    is kept so the same type can describe the pole integrals.
    """

    side: ContourSide = ContourSide.ABOVE_POLES
    deformation: Deformation = Deformation.STEEPEST_DESCENT

    def __post_init__(self):
        if not isinstance(self.side, ContourSide):
            raise DomainError("side must be a ContourSide")
        if not isinstance(self.deformation, Deformation):
            raise DomainError("deformation must be a Deformation")


class EnergyAmplitude(NamedTuple):
    E: float
    amp: complex


# ---------------------------------------------------------------------------
# energy representation

def _d_series(z):
    """``(w(-z) - w(z)) / (2 z)`` for small ``z`` (Maclaurin, odd terms)."""
    total = np.zeros_like(z)
    zz = np.ones_like(z)
    for n in range(1, 16, 2):
        total = total - (1j ** n) * zz / gamma(0.5 * n + 1.0)
        zz = zz * z * z
    return total


def _d_function(z):
    """``(w(-z) - w(z)) / (2 z)``, regular at ``z = 0``."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < _SERIES_RADIUS
    if small.any():
        out[small] = _d_series(z[small])
    big = ~small
    if big.any():
        zb = z[big]
        out[big] = (faddeyeva_w(-zb) - faddeyeva_w(zb)) / (2.0 * zb)
    return out


def _taylor_kernel(p, q, c):
    """``S(p; q)`` for ``p`` close to ``q`` through an expansion of ``w(-c p)``."""
    derivs = faddeyeva_derivatives(-c * q, _TAYLOR_TERMS + 1)
    f = [(-c) ** k * d / math.factorial(k) for k, d in enumerate(derivs)]
    delta = p - q
    num = f[0] - 2.0 * q * f[1]
    dk = np.ones_like(delta)
    for k in range(1, _TAYLOR_TERMS + 1):
        dk = dk * delta
        num = num - dk * (2.0 * q * f[k + 1] + f[k])
    return num / (2.0 * p * (p + q)) - faddeyeva_w(c * p) / (2.0 * p * (p + q))


def overlap_kernel(p, q, c):
    """Bracket of the eigenstate overlap,

    ``S(p; q) = w(-cq)/(p^2-q^2) - w(-cp)/(2p(p-q)) - w(cp)/(2p(p+q))``.

    `S` is even and entire in `p`; the removable points ``p = 0, +-q`` are
    evaluated by series.  `p` may be complex.
    """
    p = np.asarray(p, dtype=complex)
    scalar = p.ndim == 0
    p = np.atleast_1d(p)
    q = complex(q)
    # evenness: move p next to +q if it is closer to -q
    p = np.where(np.abs(p + q) < np.abs(p - q), -p, p)
    out = np.empty_like(p)
    near = np.abs(c * (p - q)) < _TAYLOR_RADIUS
    if near.any():
        out[near] = _taylor_kernel(p[near], q, c)
    far = ~near
    if far.any():
        pf = p[far]
        cp = c * pf
        num = faddeyeva_w(-c * q) - np.exp(-cp * cp) - c * q * _d_function(cp)
        out[far] = num / (pf * pf - q * q)
    return out[0] if scalar else out


def _natural_kernel(p, p0, r):
    """``S(p; p0) + R S(p; -p0)`` in natural units."""
    out = overlap_kernel(p, p0, _C)
    if r != 0:
        out = out + r * overlap_kernel(p, -p0, _C)
    return out


def eigenstate_overlap(spec: PulseSpec, p):
    """``<phi_E | psi^(R)_{p0,tau}(tau)>`` with ``E = p^2 / 2m``.

    ``sqrt(m p hbar / 2 pi) [S(p; p0) + R S(p; -p0)]``; the ``R = 0`` bracket
    has removable singularities at ``p = p0`` handled by a series expansion.
    """
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0):
        raise DomainError("eigenstate momenta must be positive")
    s = spec.scale
    c = _C * math.sqrt(spec.tau / (s.mass * s.hbar))
    kern = overlap_kernel(p, spec.p0, c)
    if spec.reflectivity != 0:
        kern = kern + spec.reflectivity * overlap_kernel(p, -spec.p0, c)
    return np.sqrt(s.mass * p * s.hbar / (2.0 * math.pi)) * kern


def energy_amplitudes(spec: PulseSpec, energies):
    """List of :class:`EnergyAmplitude` at the given energies."""
    energies = np.asarray(energies, dtype=float)
    if np.any(energies < 0):
        raise DomainError("energies must be non-negative")
    p = np.sqrt(2.0 * spec.scale.mass * energies)
    amps = eigenstate_overlap(spec, p)
    return [EnergyAmplitude(float(e), complex(a)) for e, a in zip(energies, np.atleast_1d(amps))]


# ---------------------------------------------------------------------------
# spectral (brute-force) evolution

def _spectral_steepest(p0, r, x, dt, tol):
    # psi = 1/(2 pi i) int p exp(-i p^2 dt/2 + i p x) S_R(p) dp along
    # p = ps + exp(-i pi/4) s; ps balances the growth of the two exponentials
    t = 1.0 + dt
    ps = x / math.sqrt(t * dt)
    rot = np.exp(-0.25j * math.pi)

    def f(s):
        p = ps + rot * s
        return p * np.exp(-0.5j * p * p * dt + 1j * p * x) * _natural_kernel(p, p0, r) * rot

    res = adaptive_integrate(f, -math.inf, math.inf, tol=tol, rtol=tol,
                             scale=1.0 / math.sqrt(dt))
    return res.value / (2j * math.pi), res.error_estimate / (2.0 * math.pi)


def _spectral_real_line(p0, r, x, dt, tol, cutoff):
    # (1/pi) int_0^P p sin(px) exp(-i p^2 dt/2) S_R(p) dp; the p^-2 tail of
    # S_R is added analytically when dt = 0
    def f(p):
        return p * np.sin(p * x) * np.exp(-0.5j * p * p * dt) * _natural_kernel(p, p0, r)

    res = adaptive_integrate(f, 0.0, cutoff, tol=tol, rtol=tol, max_intervals=200000,
                             initial_panels=max(8, int(cutoff)))
    value = res.value / math.pi
    if dt == 0 and x > 0:
        tail_amp = faddeyeva_w(-_C * p0) + r * faddeyeva_w(_C * p0)
        value += tail_amp / math.pi * (0.5 * math.pi - sici(cutoff * x)[0])
    return value, res.error_estimate / math.pi


def evolve_pulse_spectral(spec: PulseSpec, x, t, contour: ContourSpec = ContourSpec(),
                          tol=1e-11, cutoff=400.0):
    """Evolved pulse from its eigenstate expansion (reference path).

    ``psi(x, t) = int dE exp(-i E (t - tau)/hbar) <x|phi_E><phi_E|psi(tau)>``.
    With ``STEEPEST_DESCENT`` the momentum integral runs along a line at
    ``-45`` degrees where the integrand decays like a Gaussian; it needs
    ``t > tau`` and is reliable for ``x^2 / (t - tau) <~ 60`` (natural
    units, tau = 1); beyond that the path integrand cancels to many digits
    and the quadrature stops with AccuracyError.  ``REAL_LINE`` integrates the oscillatory real-axis form up
    to `cutoff` (natural units) and is accurate only to roughly ``1 / cutoff``.

    Raises
    ------
    AccuracyError
        If the quadrature does not converge; the best estimate is attached.
    """
    p0, xs, ts = spec.natural(x, t)
    xs = np.atleast_1d(xs)
    ts = np.broadcast_to(ts, xs.shape)
    if np.any(xs < 0):
        raise DomainError("the pulse lives on x >= 0")
    if np.any(ts < 1.0):
        raise DomainError("spectral evolution needs t >= tau")
    out = np.empty(xs.shape, dtype=complex)
    for i, (xi, ti) in enumerate(zip(xs, ts)):
        dt = ti - 1.0
        if contour.deformation is Deformation.STEEPEST_DESCENT:
            if dt <= 0:
                raise DomainError("the steepest-descent path needs t > tau")
            value, _ = _spectral_steepest(p0, spec.reflectivity, float(xi), dt, tol)
        else:
            value, _ = _spectral_real_line(p0, spec.reflectivity, float(xi), dt, tol, cutoff)
        out[i] = value
    return out[0] if np.ndim(x) == 0 else out


# ---------------------------------------------------------------------------
# closed forms

def _block(p0, x, t):
    """``exp(i x^2 / 2t) / 2 (w[-u(p0, t)] + w[-u(-p0, t)])`` in natural units."""
    st = np.sqrt(t)
    um = _C * st * (p0 - x / t)
    up = _C * st * (-p0 - x / t)
    return 0.5 * np.exp(0.5j * x * x / t) * (faddeyeva_w(-um) + faddeyeva_w(-up))


def source_pulse(p0, tau, x, t, scale: PhysicalScale = NATURAL):
    """Rectangular-window source pulse, ``psi(0, t) = exp(-i w0 t)`` on ``[0, tau]``.

    A source switched on at ``t = 0`` minus a second one switched on at
    ``tau`` carrying the phase ``exp(-i p0^2 tau / 2 m hbar)``.  `p0` may be
    complex (evanescent components of apodized pulses); the result depends on
    ``p0^2`` only.
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(x < 0):
        raise DomainError("the source pulse is defined for x >= 0")
    if np.any(t <= 0):
        raise DomainError("time must be positive")
    if not tau > 0:
        raise DomainError("tau must be positive")
    x, t = np.broadcast_arrays(x, t)
    out = np.asarray(_source_block(p0, x, t, scale), dtype=complex)
    late = t > tau
    if np.any(late):
        phase = np.exp(-1j * np.asarray(p0) ** 2 * tau / (2.0 * scale.mass * scale.hbar))
        phase = np.broadcast_to(phase, x.shape)
        out = np.array(out, copy=True)
        out[late] -= phase[late] * _source_block(
            np.broadcast_to(p0, x.shape)[late], x[late], t[late] - tau, scale)
    return out[()] if out.ndim == 0 else out


def _u_nodes(r, v_re):
    """Composite Gauss-Legendre nodes on ``[-L, L]`` graded around ``u = -Re(v)/r``.

    ``w(r u + v)`` varies on the scale ``1/r`` near its centre and like
    ``1/|u - centre|`` further out.
    """
    L = _U_CUTOFF
    edges = [np.linspace(-L, L, 53)]
    if r > 1.0:
        centre = -v_re / r
        h = 0.5 / r
        fine = centre + h * np.arange(-16, 17)
        k = np.arange(1, 60)
        graded = 8.0 * h * 1.25 ** k
        edges += [fine, centre + graded, centre - graded]
    e = np.concatenate(edges)
    e = np.unique(np.clip(e, -L, L))
    x, w = gauss_legendre_panels(0.0, 1.0, 1, order=16)
    x = 2.0 * x - 1.0
    half = 0.5 * np.diff(e)
    mid = 0.5 * (e[1:] + e[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :] * 2.0).ravel()
    return nodes, weights


def _pole_term(u, ui, hu, r, hi_derivs, radius):
    """``(h(u) - h(ui)) / (u - ui)``, expanded around ``ui`` when close."""
    d = u - ui
    out = np.empty_like(hu)
    close = np.abs(d) < radius
    far = ~close
    out[far] = (hu[far] - hi_derivs[0]) / d[far]
    if close.any():
        dc = d[close]
        acc = np.zeros_like(dc)
        for k in range(len(hi_derivs) - 1, 0, -1):
            acc = acc * dc + hi_derivs[k] * r ** k / math.factorial(k)
        out[close] = acc
    return out


def _y_prime(p0, x, dt):
    """Remaining contour term after the Gaussian part of ``w(-u0)`` is split off.

    ``-(i/2pi) e^{i x^2/2dt} int_{G+} du e^{-u^2} w(r u + v) [1/(u-u1) - 1/(u-u2)]``
    with ``r = 1/sqrt(dt)``, ``v = (1+i)/2 x/dt``, ``u_{1,2} = u(+-p0, dt)``.
    The line integral is done on the real axis after subtracting the pole
    values; ``int_{G+} e^{-u^2}/(u - z) du = -i pi w(-z)`` restores them.
    """
    r = 1.0 / math.sqrt(dt)
    z1 = _C * p0          # r u1 + v = u0(p0)
    z2 = -z1              # r u2 + v = u0(-p0)
    d1 = faddeyeva_derivatives(z1, 10)
    d2 = faddeyeva_derivatives(z2, 10)
    radius = 0.1 / max(r, 1.0)
    out = np.empty(x.shape, dtype=complex)
    for i, xi in enumerate(x):
        v = _C * xi / dt
        u1 = _C * math.sqrt(dt) * (p0 - xi / dt)
        u2 = _C * math.sqrt(dt) * (-p0 - xi / dt)
        u, wts = _u_nodes(r, v.real)
        hu = faddeyeva_w(r * u + v)
        integrand = np.exp(-u * u) * (_pole_term(u, u1, hu, r, d1, radius)
                                      - _pole_term(u, u2, hu, r, d2, radius))
        total = np.dot(wts, integrand)
        total += -1j * math.pi * (d1[0] * faddeyeva_w(-u1) - d2[0] * faddeyeva_w(-u2))
        out[i] = -0.5j / math.pi * np.exp(0.5j * xi * xi / dt) * total
    return out


def _y_exact_natural(p0, x, t):
    dt = t - 1.0
    u_minus = _C * math.sqrt(t) * (-p0 - x / t)
    closed = -np.exp(0.5j * x * x / t) * faddeyeva_w(-u_minus)
    return closed + _y_prime(p0, x, dt)


def _check_after_closing(spec, x, t):
    p0, xs, ts = spec.natural(x, t)
    if np.ndim(ts) != 0:
        raise DomainError("t must be a scalar")
    if np.any(xs < 0):
        raise DomainError("the pulse lives on x >= 0")
    if not ts > 1.0:
        raise DomainError("t must exceed tau")
    return p0, np.atleast_1d(xs), float(ts)


def y_integral_exact(spec: PulseSpec, x, t):
    """The contour term of the closed ``R = -1`` pulse, evaluated by quadrature."""
    p0, xs, ts = _check_after_closing(spec, x, t)
    out = _y_exact_natural(p0, xs, ts)
    return out[0] if np.ndim(x) == 0 else out


def _sine_pulse_natural(p0, x, t):
    dt = t - 1.0
    prefactor = np.exp(-0.5j * p0 * p0) - faddeyeva_w(_C * p0)
    return _block(p0, x, t) - prefactor * _block(p0, x, dt) + _y_exact_natural(p0, x, t)


def evolve_pulse_exact(spec: PulseSpec, x, t):
    """Pulse ``psi^(R)_{p0,tau}(x, t)`` on ``x >= 0`` from closed forms.

    ``R = -1`` uses two Faddeyeva blocks plus a contour integral with a
    Gaussian-decaying integrand; ``R = 1`` is the rectangular source pulse;
    other `R` are the combination ``(1+R)/2 psi^(1) + (1-R)/2 psi^(-1)``.
    Before the shutter closes (``t <= tau``) the semi-infinite solution is
    returned.  `t` must be a scalar.
    """
    if np.ndim(t) != 0:
        raise DomainError("t must be a scalar")
    xs = np.asarray(x, dtype=float)
    if np.any(xs < 0):
        raise DomainError("the pulse lives on x >= 0")
    if not t > 0:
        raise DomainError("time must be positive")
    r = spec.reflectivity
    if t <= spec.tau:
        return moshinsky_psi(ShutterState(r, spec.p0, spec.scale), xs, t)
    out = 0.0
    if r != 1:
        p0, xn, tn = _check_after_closing(spec, xs, t)
        sine = _sine_pulse_natural(p0, xn, tn).reshape(xs.shape)
        out = out + 0.5 * (1.0 - r) * sine
    if r != -1:
        out = out + 0.5 * (1.0 + r) * source_pulse(spec.p0, spec.tau, xs, t, spec.scale)
    return out[()] if np.ndim(out) == 0 else out


_CAUCHY_NODES = 32


def _regular_part(v, mirror, r, u_i, order):
    """``A = W(u_i)`` and ``Q(0) + Q''(0)/4`` for ``Q(u) = (W(u) - A) / (u - u_i)``,
    where ``W(u) = w(mirror (r u + v))``.

    Close to ``u_i = 0`` the explicit form cancels like ``1/u_i^3``; there
    the Taylor coefficients ``W_k`` come from a Cauchy integral on a circle of
    radius ``rho = min(1, 1/r)`` and ``Q(0) = sum W_k u_i^(k-1)``,
    ``Q''(0)/2 = sum W_k u_i^(k-3)``.
    """
    a = faddeyeva_w(mirror * (r * u_i + v))
    out = np.empty_like(a)
    rho = min(1.0, 1.0 / r)
    near = np.abs(u_i) < 0.25 * rho
    far = ~near
    if far.any():
        uf, af = u_i[far], a[far]
        w0, w1, w2 = faddeyeva_derivatives(mirror * v[far], 2)
        w1, w2 = mirror * r * w1, r * r * w2
        val = (af - w0) / uf
        if order >= 1:
            d2 = w2 / (-uf) - 2.0 * w1 / uf ** 2 + 2.0 * w0 / (-uf) ** 3
            val = val + (d2 + 2.0 * af / uf ** 3) / 4.0
        out[far] = val
    n = _CAUCHY_NODES
    circle = rho * np.exp(2j * math.pi * np.arange(n) / n)
    for k in np.flatnonzero(near):
        coef = np.fft.fft(faddeyeva_w(mirror * (r * circle + v[k]))) / n / rho ** np.arange(n)
        powers = u_i[k] ** np.arange(n - 1)
        val = powers @ coef[1:]
        if order >= 1:
            val = val + 0.5 * (powers[: n - 3] @ coef[3:])
        out[k] = val
    return a, out


def _bm_natural(p0, x, t, order, form):
    """Singularity extraction for the contour term.

    ``int e^{-u^2} g(u) du ~ sum A_i [-i pi w(-u_i) + sqrt(pi)/u_i] + sqrt(pi) [h(0) + h''(0)/4]``
    with ``h = g - sum A_i / (u - u_i)``.  ``form="split"`` applies it to
    ``g = w(ru+v) [1/(u-u1) - 1/(u-u2)]`` after the Gaussian part of
    ``w(-u0)`` has been integrated exactly; ``form="printed"`` applies it to
    ``g = w(ru+v)/(u-u1) + w(-ru-v)/(u-u2)``, whose entire part carries the
    growing factor ``exp(-(ru+v)^2)`` and is much less accurate.
    """
    dt = t - 1.0
    r = 1.0 / math.sqrt(dt)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    v = _C * x / dt
    sd = math.sqrt(dt)
    u1 = _C * sd * (p0 - x / dt)
    u2 = _C * sd * (-p0 - x / dt)
    if np.any(u1 == 0) or np.any(u2 == 0):
        raise DegenerateInputError("observation point sits on a pole of the contour integrand")
    if form == "split":
        # (pole, sign of its term in g, mirror of the w argument)
        poles = ((u1, 1.0, 1.0), (u2, -1.0, 1.0))
        u_minus = _C * math.sqrt(t) * (-p0 - x / t)
        closed = -np.exp(0.5j * x * x / t) * faddeyeva_w(-u_minus)
    elif form == "printed":
        poles = ((u1, 1.0, 1.0), (u2, 1.0, -1.0))
        closed = 0.0
    else:
        raise DomainError(f"unknown form {form!r}")
    total = 0j
    for u_i, sign, mirror in poles:
        a, reg = _regular_part(v, mirror, r, u_i, order)
        total = total + sign * (a * (-1j * math.pi * faddeyeva_w(-u_i)) + SQRT_PI * reg)
    return closed - 0.5j / math.pi * np.exp(0.5j * x * x / dt) * total


def y_integral_approx(spec: PulseSpec, x, t, order=0, form="split"):
    """Closed-form approximation of the contour term by singularity extraction.

    The integrand is split into its pole parts, integrated exactly, and an
    entire remainder ``h`` whose Gaussian integral is approximated by
    ``sqrt(pi) [h(0) + h''(0)/4 + ...]``; `order` selects how many of the
    even-derivative terms beyond ``h(0)`` are kept (0 or 1).  See
    :func:`_bm_natural` for the two integrand forms.

    Raises
    ------
    DegenerateInputError
        If the observation point coincides with a pole (``u_i = 0``).
    """
    if order not in (0, 1):
        raise DomainError("order must be 0 or 1")
    p0, xs, ts = _check_after_closing(spec, x, t)
    out = _bm_natural(p0, xs, ts, order, form)
    return out[0] if np.ndim(x) == 0 else out


def pulse_difference_estimate(spec: PulseSpec, x, t, order=0, form="split"):
    """Approximate ``psi^(-1) - psi^(1)`` with the contour term replaced by its
    singularity-extraction estimate.

    The exact difference is ``w[u0(p0, tau)] exp(i x^2/2dt)/2 {w[-u(p0,dt)] + w[-u(-p0,dt)]} + Y``.
    """
    p0, xs, ts = _check_after_closing(spec, x, t)
    dt = ts - 1.0
    out = faddeyeva_w(_C * p0) * _block(p0, xs, dt) + _bm_natural(p0, xs, ts, order, form)
    return out[0] if np.ndim(x) == 0 else out


# ---------------------------------------------------------------------------
# inner products at t = tau

def _xi_rule(a_max, tail_start=None, panels_per_unit=None):
    """Nodes on ``[0, inf)`` for products of ``w((1+i)(xi -+ a)/2)``.

    The integrands oscillate like ``exp(-i (xi - a)^2 / 2)`` behind the front
    and decay like ``1/xi^2`` ahead of it; the tail beyond ``X`` is mapped
    with ``xi = X / s``.
    """
    X = tail_start if tail_start is not None else a_max + 12.0
    width = 0.5 * min(1.0, 2.0 * math.pi / max(a_max, 1e-300))
    n_panels = max(8, int(math.ceil(X / width)))
    x1, w1 = gauss_legendre_panels(0.0, X, n_panels)
    s, ws = gauss_legendre_panels(0.0, 1.0, 24)
    x2 = X / s
    w2 = ws * X / (s * s)
    return np.concatenate([x1, x2]), np.concatenate([w1, w2])


def _profile_at_tau(a, r, xi):
    """``w[(1+i)(xi-a)/2] + R w[(1+i)(xi+a)/2]`` (twice the amplitude, phase dropped)."""
    f = faddeyeva_w(_C * (xi - a))
    if r != 0:
        f = f + r * faddeyeva_w(_C * (xi + a))
    return f


@lru_cache(maxsize=256)
def _gram_position(action, refls):
    a = math.sqrt(2.0 * action)
    xi, wts = _xi_rule(a)
    profiles = [_profile_at_tau(a, r, xi) for r in refls]
    n = len(refls)
    gram = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            gram[i, j] = np.sum(wts * np.conj(profiles[i]) * profiles[j])
    return gram


def pulse_inner_product(spec_a: PulseSpec, spec_b: PulseSpec, method="position", cutoff=300.0):
    """``<psi_a(tau) | psi_b(tau)>`` for two pulses sharing ``p0`` and ``tau``.

    ``position`` integrates the profiles on ``x > 0``; ``energy`` integrates
    ``(hbar / 2 pi) p^2 conj(S_a) S_b`` over momentum, with the ``1/p^2`` tail
    beyond `cutoff` (natural units) added analytically.
    """
    if (spec_a.p0, spec_a.tau, spec_a.scale) != (spec_b.p0, spec_b.tau, spec_b.scale):
        raise DomainError("inner products need equal p0, tau and scale")
    ra, rb = float(spec_a.reflectivity), float(spec_b.reflectivity)
    length = spec_a.length_unit
    if method == "position":
        gram = _gram_position(spec_a.action, (ra, rb))
        return complex(0.25 * length * gram[0, 1])
    if method == "energy":
        p0 = spec_a.p0 / spec_a.momentum_unit
        aa = faddeyeva_w(-_C * p0) + ra * faddeyeva_w(_C * p0)
        ab = faddeyeva_w(-_C * p0) + rb * faddeyeva_w(_C * p0)

        def f(p):
            return p * p * np.conj(_natural_kernel(p, p0, ra)) * _natural_kernel(p, p0, rb)

        # the chirp exp(-i p^2/2) fixes the panels: equal steps in p^2, plus
        # uniform ones around the carrier where S varies on the unit scale
        edges = np.union1d(np.sqrt(np.linspace(0.0, cutoff * cutoff, int(cutoff * cutoff / math.pi) + 2)),
                           np.linspace(0.0, min(cutoff, p0 + 20.0), 400))
        xg, wg = np.polynomial.legendre.leggauss(16)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        nodes = (mid[:, None] + half[:, None] * xg).ravel()
        wts = (half[:, None] * wg).ravel()
        value = np.sum(wts * f(nodes))
        # S_R ~ (A_R - [(1+R) + (1-R) p0/p] exp(-i p^2/2)) / p^2 beyond the
        # cutoff; cross terms between the constant and the chirp average out
        tail = (np.conj(aa) * ab + (1.0 + ra) * (1.0 + rb)) / cutoff
        tail += p0 * ((1.0 + ra) * (1.0 - rb) + (1.0 - ra) * (1.0 + rb)) / (2.0 * cutoff * cutoff)
        return complex((value + tail) / (2.0 * math.pi) * length)
    raise DomainError(f"unknown method {method!r}")


def pulse_norm(spec: PulseSpec, method="position"):
    """``<psi(tau)|psi(tau)>`` (relative normalisation, plane-wave amplitude 1)."""
    return pulse_inner_product(spec, spec, method).real


def overlap_probability(R, Rp, p0, tau, scale: PhysicalScale = NATURAL, method="position"):
    """``|<psi^(R)|psi^(R')>|^2 / (<psi^(R)|psi^(R)> <psi^(R')|psi^(R')>)``.

    Independent of the evolution time and, through the profile variables,
    a function of ``S / hbar = tau p0^2 / (2 m hbar)`` only.

    Raises
    ------
    DegenerateInputError
        If either norm is below ``1e-14``.
    """
    sa = PulseSpec(R, p0, tau, scale)
    sb = PulseSpec(Rp, p0, tau, scale)
    if method == "position":
        gram = _gram_position(sa.action, (float(R), float(Rp)))
        naa, nbb, nab = gram[0, 0].real, gram[1, 1].real, gram[0, 1]
        scale_factor = 0.25 * sa.length_unit
    else:
        naa = pulse_norm(sa, method)
        nbb = pulse_norm(sb, method)
        nab = pulse_inner_product(sa, sb, method)
        scale_factor = 1.0
    if min(naa, nbb) * scale_factor < 1e-14:
        raise DegenerateInputError("pulse norm vanishes numerically")
    return float(min(1.0, abs(nab) ** 2 / (naa * nbb)))


def overlap_scan(actions, pairs=((-1.0, 1.0), (0.0, -1.0), (0.0, 1.0))):
    """Overlap probabilities on a grid of ``S / hbar`` for several ``(R, R')`` pairs.

    Returns an array of shape ``(len(actions), len(pairs))``.
    """
    actions = np.asarray(actions, dtype=float)
    out = np.empty((actions.size, len(pairs)))
    for i, s in enumerate(actions):
        # natural units with tau = 1: p0 = sqrt(2 S)
        p0 = math.sqrt(2.0 * s)
        for j, (r, rp) in enumerate(pairs):
            out[i, j] = overlap_probability(r, rp, p0, 1.0)
    return out


__all__ = [
    "ContourSpec", "Deformation", "EnergyAmplitude", "PulseSpec",
    "eigenstate_overlap", "energy_amplitudes", "evolve_pulse_exact",
    "evolve_pulse_spectral", "overlap_kernel", "overlap_probability", "overlap_scan",
    "pulse_difference_estimate", "pulse_inner_product", "pulse_norm", "source_pulse",
    "y_integral_approx", "y_integral_exact",
]
