"""Smoothed aperture functions for source pulses.

Every window here is a trigonometric polynomial on ``[0, tau]``, so the
boundary value ``chi(t) exp(-i w0 t)`` is a finite sum ``sum_k c_k exp(-i w_k t)``
and the pulse is the same finite sum of rectangular source pulses with
momenta ``p_k = sqrt(2 m hbar w_k)``.  Frequencies below zero give evanescent
momenta on the branch ``Im p >= 0``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq, minimize_scalar
from scipy.signal import find_peaks

from .errors import AccuracyError, DomainError
from .oracle.quadrature import adaptive_integrate, gauss_legendre_panels
from .pulse import source_pulse
from .units import NATURAL, PhysicalScale


class WindowKind(enum.Enum):
    RECTANGULAR = "rectangular"
    SINE = "sine"
    HANNING = "hanning"
    BLACKMAN = "blackman"
    PERIODIC_HANNING = "periodic_hanning"


# chi(t) = sum_j a_j exp(-i j Omega t) with Omega = pi / tau
_HARMONICS = {
    WindowKind.RECTANGULAR: ((0, 1.0),),
    WindowKind.SINE: ((-1, -0.5j), (1, 0.5j)),
    WindowKind.HANNING: ((0, 0.5), (2, -0.25), (-2, -0.25)),
    WindowKind.BLACKMAN: ((0, 0.42), (2, -0.25), (-2, -0.25), (4, 0.04), (-4, 0.04)),
    WindowKind.PERIODIC_HANNING: ((0, 0.5), (2, -0.25), (-2, -0.25)),
}


@dataclass(frozen=True)
class ApertureWindow:
    """Aperture ``chi(t)`` of duration `tau` (``Omega = pi / tau``).

    ``PERIODIC_HANNING`` continues ``sin^2(Omega t)`` for all ``t >= 0``.
    """

    kind: WindowKind
    tau: float

    def __post_init__(self):
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise DomainError("tau must be positive and finite")

    @property
    def omega(self):
        return math.pi / self.tau

    @property
    def periodic(self):
        return self.kind is WindowKind.PERIODIC_HANNING

    @property
    def harmonics(self):
        return _HARMONICS[self.kind]

    def derivative(self, t, order=0):
        """``d^n chi / dt^n`` of the trigonometric polynomial (no truncation)."""
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        for j, a in self.harmonics:
            d = j * self.omega
            out = out + a * (-1j * d) ** order * np.exp(-1j * d * t)
        return out.real


def window_value(win: ApertureWindow, t):
    """``chi(t)``; zero outside ``[0, tau]`` unless the window is periodic."""
    t = np.asarray(t, dtype=float)
    val = win.derivative(t)
    inside = t >= 0 if win.periodic else (t >= 0) & (t <= win.tau)
    out = np.where(inside, val, 0.0)
    return out[()] if out.ndim == 0 else out


class MomentumLadder(NamedTuple):
    """Momenta ``sqrt(2 m hbar (w0 + k Omega))`` for ``k = 0, +-1, +-2, +-4``."""

    p0: complex
    p_plus: complex
    p_minus: complex
    p_beta_plus: complex
    p_beta_minus: complex
    p_gamma_plus: complex
    p_gamma_minus: complex


def shifted_momentum(p0, shift, scale: PhysicalScale = NATURAL):
    """``sqrt(p0^2 + 2 m hbar shift)`` on the branch ``Im p >= 0``."""
    return complex(np.sqrt(complex(p0 * p0 + 2.0 * scale.mass * scale.hbar * shift)))


def momentum_ladder(p0, tau, scale: PhysicalScale = NATURAL) -> MomentumLadder:
    om = math.pi / tau
    ks = (0, 1, -1, 2, -2, 4, -4)
    return MomentumLadder(*(shifted_momentum(p0, k * om, scale) for k in ks))


def decomposition(win: ApertureWindow, p0, scale: PhysicalScale = NATURAL):
    """Coefficients and momenta ``[(c_k, p_k)]`` of the rectangular-pulse sum."""
    return [(a, shifted_momentum(p0, j * win.omega, scale)) for j, a in win.harmonics]


def apodized_pulse(win: ApertureWindow, p0, x, t, scale: PhysicalScale = NATURAL):
    """Wave emitted by ``psi(0, t) = chi(t) exp(-i w0 t)`` into ``x >= 0``.

    Sine: ``(i/2)(psi_{p+} - psi_{p-})``; Hanning: ``(psi_{p0} - (psi_{b+} + psi_{b-})/2) / 2``;
    Blackman: ``0.42 psi_{p0} - 0.25 sum psi_{p_beta} + 0.04 sum psi_{p_gamma}``;
    the periodic Hanning window uses the same weights with sources that
    never close.
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    tau = math.inf if win.periodic else win.tau
    total = 0j
    for c, pk in decomposition(win, p0, scale):
        total = total + c * source_pulse(pk, tau, x, t, scale)
    return total


def boundary_kernel_pulse(win: ApertureWindow, p0, x, t, scale: PhysicalScale = NATURAL, tol=1e-13):
    """Independent route: ``int_0^tau K+(t, x; s, 0) chi(s) exp(-i w0 s) ds``.

    The time-domain boundary integral, integrated adaptively without any
    Faddeyeva function.  Needs ``t > tau`` and ``x > 0`` so the kernel stays
    regular on the whole interval.
    """
    if win.periodic:
        raise DomainError("the boundary integral oracle needs a closing shutter")
    if not (t > win.tau and x > 0):
        raise DomainError("the boundary integral oracle needs t > tau and x > 0")
    m, hbar = scale.mass, scale.hbar
    w0 = p0 * p0 / (2.0 * m * hbar)
    amp = np.exp(-0.25j * math.pi) * math.sqrt(m / (2.0 * math.pi * hbar)) * x

    def f(s):
        d = t - s
        return amp * d ** -1.5 * np.exp(1j * m * x * x / (2.0 * hbar * d) - 1j * w0 * s) \
            * win.derivative(s)

    res = adaptive_integrate(f, 0.0, win.tau, tol=tol, initial_panels=32,
                             max_intervals=200000)
    return res.value


# ---------------------------------------------------------------------------
# boundary spectrum and energy distribution

def boundary_spectrum(win: ApertureWindow, nu):
    """``int_0^tau chi(t) exp(i nu t) dt`` with ``nu = w - w0``."""
    if win.periodic:
        raise DomainError("periodic windows have no finite spectrum")
    nu = np.asarray(nu, dtype=float)
    tau = win.tau
    out = np.zeros(nu.shape, dtype=complex)
    for j, a in win.harmonics:
        v = nu - j * win.omega
        # (exp(i v tau) - 1) / (i v) without cancellation at v = 0
        out = out + a * tau * np.exp(0.5j * v * tau) * np.sinc(v * tau / (2.0 * math.pi))
    return out


def _tail_average(win, nu):
    """Oscillation average of ``|spectrum|^2`` at large ``nu``, from the edge values."""
    tau = win.tau
    out = 0.0
    for k in range(3):
        e = win.derivative(0.0, k) ** 2 + win.derivative(tau, k) ** 2
        out = out + e / nu ** (2 * k + 2)
    return out


@dataclass(frozen=True)
class _Spectrum:
    nu: np.ndarray
    weight: np.ndarray       # quadrature weight times the density sqrt(w)|spectrum|^2
    cut: float
    tail_moments: tuple      # int_cut^inf of density * w^k, k = 0, 1, 2


def _density(win, w0, w):
    return np.sqrt(np.maximum(w, 0.0)) * np.abs(boundary_spectrum(win, w - w0)) ** 2


def _frequency_rule(tau, w_cut, n_panels, order=12):
    """Gauss-Legendre on ``[0, w_cut]``; the first panel in ``w = s^2`` absorbs the ``sqrt(w)`` edge."""
    h = w_cut / n_panels
    nodes, wts = gauss_legendre_panels(h, w_cut, n_panels - 1, order=order)
    s, ws = gauss_legendre_panels(0.0, math.sqrt(h), 1, order=2 * order)
    return np.concatenate([s * s, nodes]), np.concatenate([2.0 * s * ws, wts])


def _tail_moment(win, w0, cut, k):
    """``int_cut^inf sqrt(w) w^k <|spectrum|^2> dw`` using the edge-value average."""
    tau = win.tau
    nu_c = cut - w0
    total = 0.0
    for n in range(3):
        e = float(win.derivative(0.0, n) ** 2 + win.derivative(tau, n) ** 2)
        if e < 1e-24 * (win.omega ** n) ** 2:
            continue
        # s = 1 / nu: integrand (1 + w0 s)^(k + 1/2) s^(2n - k - 1/2)
        power = 2 * n - k - 0.5
        if power <= -1.0:
            return math.inf
        val, _ = quad(lambda s: (1.0 + w0 * s) ** (k + 0.5), 0.0, 1.0 / nu_c,
                      weight="alg", wvar=(power, 0.0))
        total += e * val
    return total


def _spectrum(win: ApertureWindow, w0, periods=4000):
    """Quadrature over ``w in [0, cut]`` resolving the ``2 pi / tau`` ripple, plus tails."""
    tau = win.tau
    cut = w0 + periods * 2.0 * math.pi / tau
    nodes, wts = _frequency_rule(tau, cut, 2 * periods + int(w0 * tau))
    dens = _density(win, w0, nodes)
    tails = tuple(_tail_moment(win, w0, cut, k) for k in range(3))
    return _Spectrum(nodes, wts * dens, cut, tails), nodes, dens


def spectral_norm(win: ApertureWindow, p0, scale: PhysicalScale = NATURAL):
    """``int |psi|^2 dx`` after closing, ``(1/2pi) int_0^inf |chi_hat|^2 v(w) dw``."""
    w0 = p0 * p0 / (2.0 * scale.mass * scale.hbar)
    sp, nodes, _ = _spectrum(win, w0)
    total = float(np.sum(sp.weight)) + sp.tail_moments[0]
    return total * math.sqrt(2.0 * scale.hbar / scale.mass) / (2.0 * math.pi)


def energy_distribution(win: ApertureWindow, E, Ep, scale: PhysicalScale = NATURAL):
    """Normalised distribution of final energies ``E'`` for a source of energy ``E``.

    ``P(E') = N sqrt(E') |chi_hat((E' - E)/hbar)|^2``; for the rectangular
    window this is ``N sqrt(E') sin^2[(E - E') tau / 2 hbar] / (E - E')^2`` up to
    the factor ``4 hbar^2`` absorbed in ``N``.
    """
    if E < 0:
        raise DomainError("source energy must be non-negative")
    Ep = np.asarray(Ep, dtype=float)
    if np.any(Ep < 0):
        raise DomainError("energies must be non-negative")
    hbar = scale.hbar
    w0 = E / hbar
    sp, _, _ = _spectrum(win, w0)
    norm = (float(np.sum(sp.weight)) + sp.tail_moments[0]) * hbar   # in E' measure
    w = Ep / hbar
    return _density(win, w0, w) / norm


def energy_moments(win: ApertureWindow, E, scale: PhysicalScale = NATURAL, cutoff=None):
    """Mean and variance of ``E'``; with `cutoff` the moments are taken over ``[0, cutoff]``.

    Returns ``inf`` for the variance when it diverges (windows with a jump).
    """
    hbar = scale.hbar
    w0 = E / hbar
    if cutoff is None:
        sp, nodes, _ = _spectrum(win, w0)
        z = float(np.sum(sp.weight)) + sp.tail_moments[0]
        m1 = (float(np.sum(sp.weight * nodes)) + sp.tail_moments[1]) / z
        m2 = (float(np.sum(sp.weight * nodes ** 2)) + sp.tail_moments[2]) / z
    else:
        wc = cutoff / hbar
        n_per = max(8, int(math.ceil(wc * win.tau / (2 * math.pi))))
        nodes, wts = _frequency_rule(win.tau, wc, 2 * n_per)
        d = wts * _density(win, w0, nodes)
        z = float(np.sum(d))
        m1 = float(np.sum(d * nodes)) / z
        m2 = float(np.sum(d * nodes ** 2)) / z
    if not (math.isfinite(m1) and math.isfinite(m2)):
        return m1 * hbar, math.inf
    return m1 * hbar, (m2 - m1 * m1) * hbar * hbar


class SpreadMeasure(enum.Enum):
    FWHM = "fwhm"
    SIGMA = "sigma"


@dataclass(frozen=True)
class EnergySpread:
    fwhm: float
    sigma: Optional[float]
    product_fwhm: float
    product_sigma: Optional[float]
    divergent: bool
    crossover_time: float
    measure: SpreadMeasure = SpreadMeasure.FWHM

    @property
    def product(self):
        return self.product_fwhm if self.measure is SpreadMeasure.FWHM else self.product_sigma


def energy_fwhm(win: ApertureWindow, E, scale: PhysicalScale = NATURAL):
    """Full width at half maximum of the main lobe of :func:`energy_distribution`."""
    hbar, tau = scale.hbar, win.tau
    w0 = E / hbar
    lobe = 4.0 * math.pi / tau          # past the first zeros of every window here
    lo, hi = max(0.0, w0 - lobe), w0 + lobe
    grid = np.linspace(lo, hi, 4001)
    dens = _density(win, w0, grid)
    i = int(np.argmax(dens))
    step = grid[1] - grid[0]
    f = lambda w: float(_density(win, w0, np.array([w]))[0])
    res = minimize_scalar(lambda w: -f(w), bounds=(max(lo, grid[i] - step), grid[i] + step),
                          method="bounded", options={"xatol": 1e-12 * lobe})
    w_pk, half = float(res.x), -0.5 * float(res.fun)
    g = lambda w: f(w) - half
    try:
        j = i + int(np.argmax(dens[i:] < half))
        k = i - int(np.argmax(dens[i::-1] < half))
        right = brentq(g, grid[j - 1], grid[j], xtol=1e-14 * lobe)
        left = brentq(g, grid[k], grid[k + 1], xtol=1e-14 * lobe)
    except ValueError as exc:
        raise AccuracyError("half-maximum crossing not bracketed") from exc
    return (right - left) * hbar


def uncertainty_product(win: ApertureWindow, p0, measure=SpreadMeasure.FWHM,
                        scale: PhysicalScale = NATURAL) -> EnergySpread:
    """``Delta E tau`` for the window at source momentum `p0`.

    The standard deviation is reported as divergent for windows that jump at
    their edges (the rectangular one).  ``crossover_time`` is ``h m / p0^2``.
    """
    if win.periodic:
        raise DomainError("the energy spread of a periodic window is not defined")
    E = p0 * p0 / (2.0 * scale.mass)
    fw = energy_fwhm(win, E, scale)
    _, var = energy_moments(win, E, scale)
    divergent = not math.isfinite(var)
    sig = None if divergent else math.sqrt(var)
    return EnergySpread(fw, sig, fw * win.tau, None if divergent else sig * win.tau,
                        divergent, scale.crossover_time(p0), SpreadMeasure(measure))


def uncertainty_knee(taus, products):
    """Crossing of the small-``tau`` linear asymptote with the saturation level.

    The linear asymptote is a least-squares line through the lowest quarter
    of the scan; the saturation level is the product at the largest ``tau``.
    """
    taus = np.asarray(taus, dtype=float)
    products = np.asarray(products, dtype=float)
    n = max(3, len(taus) // 4)
    slope, icpt = np.polyfit(taus[:n], products[:n], 1)
    if slope <= 0:
        raise AccuracyError("no linear growth regime in the scan")
    return (products[-1] - icpt) / slope


# ---------------------------------------------------------------------------
# sidelobes

class Peak(NamedTuple):
    x: float
    density: float


@dataclass(frozen=True)
class SidelobeReport:
    main: Peak
    lobes: List[Peak]
    norm: float

    @property
    def largest(self):
        return max((p.density for p in self.lobes), default=0.0)


def normalised_density(win: ApertureWindow, p0, x, t, scale: PhysicalScale = NATURAL, norm=None):
    """``|psi|^2 / ||psi||^2`` with the norm from :func:`spectral_norm`."""
    if norm is None:
        norm = spectral_norm(win, p0, scale)
    return np.abs(apodized_pulse(win, p0, x, t, scale)) ** 2 / norm


def sidelobe_report(win: ApertureWindow, p0, t, scale: PhysicalScale = NATURAL,
                    n_grid=6000, span=None) -> SidelobeReport:
    """Main peak and the secondary maxima trailing it, for the unit-norm state.

    The density is sampled on ``[x_c - span, x_c + span]`` around the classical
    position ``x_c = p0 t / m`` (default span: pulse length plus eight
    ``sqrt(pi hbar t / m)``); each local maximum is polished by bounded scalar
    optimisation.
    """
    if win.periodic:
        raise DomainError("sidelobes are defined for a single pulse")
    if not t > win.tau:
        raise DomainError("t must exceed tau")
    m, hbar = scale.mass, scale.hbar
    xc = p0 * t / m
    if span is None:
        span = p0 * win.tau / m + 8.0 * math.sqrt(math.pi * hbar * t / m)
    x = np.linspace(max(xc - span, 0.0), xc + span, n_grid)
    norm = spectral_norm(win, p0, scale)
    dens = normalised_density(win, p0, x, t, scale, norm)
    idx, _ = find_peaks(dens)
    dx = x[1] - x[0]
    f = lambda xx: float(normalised_density(win, p0, xx, t, scale, norm))
    peaks = []
    for i in idx:
        r = minimize_scalar(lambda xx: -f(xx), bounds=(x[i] - dx, x[i] + dx), method="bounded",
                            options={"xatol": 1e-10 * dx})
        peaks.append(Peak(float(r.x), -float(r.fun)))
    if not peaks:
        raise AccuracyError("no density maximum in the scan window")
    main = max(peaks, key=lambda pk: pk.density)
    lobes = sorted((pk for pk in peaks if pk.x < main.x), key=lambda pk: -pk.x)
    return SidelobeReport(main, lobes, norm)
