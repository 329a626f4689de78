"""Statistical mixtures over the carrier momentum.

Mixture densities, visibility of the main diffraction fringe, the alpha
washout criterion and the purity of a chopped mixture.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.signal import find_peaks
from scipy.special import erfc

from .errors import AccuracyError, DegenerateInputError, DomainError
from .oracle.quadrature import gauss_legendre_panels
from .pulse import _profile_at_tau, _xi_rule
from .shutter import ShutterState, _check_times, moshinsky_psi
from .special_functions import SQRT_PI, faddeyeva_w
from .units import NATURAL, PhysicalScale

FWHM_FACTOR = 2.0 * math.sqrt(2.0 * math.log(2.0))
FRINGE_WIDTH_COEFF = 0.85
ALPHA_COEFF = 0.36

_C_THETA = 0.5 * (1.0 + 1.0j) * SQRT_PI   # u(p, t) = _C_THETA * theta
_THETA_OSC = 40.0                          # oscillatory part resolved up to here


class DistributionKind(enum.Enum):
    MAXWELL_BOLTZMANN = "maxwell_boltzmann"
    EFFUSIVE_BEAM = "effusive_beam"
    DELTA = "delta"


@dataclass(frozen=True)
class MomentumDistribution:
    """Momentum weight ``f(p)`` of a mixture of released plane waves.

    Use the constructors :meth:`maxwell_boltzmann`, :meth:`effusive_beam` and
    :meth:`delta`.  ``temperature`` is in kelvin for SI scales (``k_B T`` in
    natural units).
    """

    kind: DistributionKind
    temperature: Optional[float] = None
    p_center: Optional[float] = None
    scale: PhysicalScale = NATURAL

    def __post_init__(self):
        if self.kind is DistributionKind.DELTA:
            if self.p_center is None or not self.p_center > 0:
                raise DomainError("a delta distribution needs a positive momentum")
            return
        if self.temperature is None or not self.temperature > 0:
            raise DomainError("temperature must be positive")
        if self.kind is DistributionKind.MAXWELL_BOLTZMANN and self.p_center is None:
            raise DomainError("Maxwell-Boltzmann needs a centre momentum")

    @classmethod
    def maxwell_boltzmann(cls, temperature, p_center, scale=NATURAL):
        return cls(DistributionKind.MAXWELL_BOLTZMANN, temperature, p_center, scale)

    @classmethod
    def effusive_beam(cls, temperature, scale=NATURAL):
        return cls(DistributionKind.EFFUSIVE_BEAM, temperature, None, scale)

    @classmethod
    def delta(cls, p, scale=NATURAL):
        return cls(DistributionKind.DELTA, None, p, scale)

    @property
    def sigma(self):
        """Thermal momentum ``sqrt(m k_B T)``."""
        if self.kind is DistributionKind.DELTA:
            return 0.0
        return math.sqrt(self.scale.mass * self.scale.k_boltzmann * self.temperature)

    def pdf(self, p):
        p = np.asarray(p, dtype=float)
        s = self.sigma
        if self.kind is DistributionKind.MAXWELL_BOLTZMANN:
            return np.exp(-((p - self.p_center) ** 2) / (2 * s * s)) / (math.sqrt(2 * math.pi) * s)
        if self.kind is DistributionKind.EFFUSIVE_BEAM:
            pp = np.maximum(p, 0.0)
            return np.where(p > 0, pp ** 3 / (2 * s ** 4) * np.exp(-pp * pp / (2 * s * s)), 0.0)
        raise DomainError("a delta distribution has no density")

    def upper_mass(self, p):
        """``int_{max(p, 0)}^inf f(q) dq`` (mixtures use ``p >= 0`` only)."""
        p = np.maximum(np.asarray(p, dtype=float), 0.0)
        s = self.sigma
        if self.kind is DistributionKind.MAXWELL_BOLTZMANN:
            return 0.5 * erfc((p - self.p_center) / (math.sqrt(2.0) * s))
        if self.kind is DistributionKind.EFFUSIVE_BEAM:
            y = p * p / (2 * s * s)
            return (1.0 + y) * np.exp(-y)
        return np.where(p < self.p_center, 1.0, 0.0)

    def support(self):
        """Interval outside which ``f`` is negligible (``< 1e-15`` of its peak)."""
        s = self.sigma
        if self.kind is DistributionKind.MAXWELL_BOLTZMANN:
            return max(0.0, self.p_center - 9.0 * s), self.p_center + 9.0 * s
        if self.kind is DistributionKind.EFFUSIVE_BEAM:
            return 0.0, 9.5 * s
        return self.p_center, self.p_center

    def mean(self):
        if self.kind is DistributionKind.EFFUSIVE_BEAM:
            return math.sqrt(9.0 * math.pi / 8.0) * self.sigma
        return self.p_center

    def fwhm(self):
        """Full width at half maximum of ``f``."""
        s = self.sigma
        if self.kind is DistributionKind.MAXWELL_BOLTZMANN:
            return FWHM_FACTOR * s
        if self.kind is DistributionKind.EFFUSIVE_BEAM:
            peak = math.sqrt(3.0) * s
            half = 0.5 * float(self.pdf(peak))
            g = lambda q: float(self.pdf(q)) - half
            return brentq(g, peak, 10 * s) - brentq(g, 1e-12 * s, peak)
        return 0.0

    def truncation_ok(self):
        """Dropping ``p < 0`` is harmless when ``p_c >= 5 sqrt(m k_B T)``."""
        if self.kind is DistributionKind.MAXWELL_BOLTZMANN:
            return self.p_center >= 5.0 * self.sigma
        return True


def distribution_pdf(dist: MomentumDistribution, p):
    """``f(p)``; zero for ``p <= 0`` in the effusive case."""
    return dist.pdf(p)


@dataclass(frozen=True)
class DensityProfile:
    x: np.ndarray
    t: float
    density: np.ndarray
    reflectivity: float = 0.0


def _smooth_edges(dist, lo, hi):
    """Panel edges in momentum resolving ``f`` (spacing ``sigma / 2``)."""
    n = max(4, int(math.ceil((hi - lo) / (0.5 * dist.sigma))))
    return np.linspace(lo, hi, n + 1)


def _theta_edges(kappa, px, lo, hi):
    # fine near the front, geometric further out
    steps = np.concatenate([np.arange(0, 2.0, 0.125), 2.0 * 1.25 ** np.arange(0, 40)])
    th = np.concatenate([-steps[::-1], steps])
    e = px + kappa * th
    return e[(e > lo) & (e < hi)]


def _panels(edges, order=16):
    edges = np.unique(edges)
    x, w = np.polynomial.legendre.leggauss(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    return (mid[:, None] + half[:, None] * x).ravel(), (half[:, None] * w).ravel()


def _s_function(theta, theta2, r):
    """Non-oscillatory part of ``2 exp(-i phase) psi`` (see :func:`mixture_density`)."""
    s = np.where(theta < 0, 1.0, -1.0) * faddeyeva_w(_C_THETA * np.abs(theta))
    if r != 0:
        s = s + r * faddeyeva_w(_C_THETA * theta2)
    return s


def _mixture_point(dist, r, x, t):
    m, hbar = dist.scale.mass, dist.scale.hbar
    kappa = math.sqrt(math.pi * m * hbar / t)
    px = m * x / t
    shift = 2.0 * px / kappa               # theta2 = theta + shift
    lo, hi = dist.support()
    # classical step
    total = float(dist.upper_mass(px))
    # smooth remainder |s|^2 / 4 over the whole support
    edges = np.concatenate([_smooth_edges(dist, lo, hi), _theta_edges(kappa, px, lo, hi), [lo, hi]])
    if lo < px < hi:
        edges = np.append(edges, px)
    p, w = _panels(edges)
    theta = (p - px) / kappa
    s = _s_function(theta, theta + shift, r)
    total += float(np.sum(w * dist.pdf(p) * 0.25 * np.abs(s) ** 2))
    # chirped interference term behind the front, Theta(theta) Re(exp(i pi theta^2/2) s)
    th_lo = max(0.0, (lo - px) / kappa)
    th_hi = (hi - px) / kappa
    th_end = min(th_hi, _THETA_OSC)
    if th_end > th_lo:
        k = np.arange(math.ceil(th_lo ** 2), math.floor(th_end ** 2) + 1)
        osc_edges = np.concatenate([np.sqrt(k), [th_lo, th_end],
                                    (_smooth_edges(dist, lo, hi) - px) / kappa])
        osc_edges = osc_edges[(osc_edges >= th_lo) & (osc_edges <= th_end)]
        th, wt = _panels(osc_edges, order=10)
        pp = px + kappa * th
        g = kappa * dist.pdf(pp) * _s_function(th, th + shift, r)
        total += float(np.sum(wt * np.real(np.exp(0.5j * math.pi * th * th) * g)))
        if th_hi > _THETA_OSC:
            # leading integration-by-parts term of the truncated chirp
            tc = _THETA_OSC
            gc = kappa * dist.pdf(px + kappa * tc) * _s_function(np.array([tc]), np.array([tc + shift]), r)[0]
            total += float(np.real(-gc * np.exp(0.5j * math.pi * tc * tc) / (1j * math.pi * tc)))
    return total


def mixture_density(dist: MomentumDistribution, R, x, t):
    """``int dp f(p) |psi_p^(R)(x, t)|^2`` over ``p >= 0``, for ``x >= 0``.

    Behind the front ``w[-u]`` carries the plane-wave chirp explicitly,
    ``|psi|^2 = Theta(theta) + |s|^2/4 + Theta(theta) Re(exp(i pi theta^2/2) s)``
    with ``s`` free of oscillations.  The step integrates to the classical
    fraction of fast particles, the ``|s|^2`` term is smooth, and only the
    chirped term needs phase-resolved panels; it is resolved up to
    ``theta = 40`` and closed with its leading asymptotic term.
    """
    t = float(_check_times(t))
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if dist.kind is DistributionKind.DELTA:
        psi = moshinsky_psi(ShutterState(R, dist.p_center, dist.scale), xs, t)
        out = np.abs(psi) ** 2
    else:
        if np.any(xs < 0):
            raise DomainError("mixture densities are evaluated on x >= 0")
        if not dist.truncation_ok():
            warnings.warn("Maxwell-Boltzmann weight at p < 0 is not negligible; it is dropped",
                          RuntimeWarning, stacklevel=2)
        out = np.array([_mixture_point(dist, R, xi, t) for xi in xs])
    return out[0] if np.ndim(x) == 0 else out


def density_profile(dist, R, x, t) -> DensityProfile:
    x = np.asarray(x, dtype=float)
    return DensityProfile(x, float(t), mixture_density(dist, R, x, t), float(R))


# ---------------------------------------------------------------------------
# fringe visibility

@dataclass(frozen=True)
class FringeReport:
    x_max: float
    x_min: float
    P_max: float
    P_min: float
    visibility: float
    width: float
    alpha: float
    suppressed: bool = False
    prominence: float = 0.0


def alpha_parameter(T, t, scale: PhysicalScale = NATURAL):
    """Fringe width over classical spread, ``0.36 sqrt(pi hbar / (k_B T t))``."""
    if not (T > 0 and t > 0):
        raise DomainError("temperature and time must be positive")
    return ALPHA_COEFF * math.sqrt(math.pi * scale.hbar / (scale.k_boltzmann * T * t))


def alpha_general(delta_p, t, scale: PhysicalScale = NATURAL):
    """``0.85 / dp * sqrt(m pi hbar / t)`` for a momentum spread `delta_p`."""
    if not (delta_p > 0 and t > 0):
        raise DomainError("momentum spread and time must be positive")
    return FRINGE_WIDTH_COEFF / delta_p * math.sqrt(scale.mass * math.pi * scale.hbar / t)


def _alpha_for(dist, t):
    if dist.kind is DistributionKind.DELTA:
        return math.inf
    if dist.kind is DistributionKind.MAXWELL_BOLTZMANN:
        return alpha_parameter(dist.temperature, t, dist.scale)
    return alpha_general(dist.fwhm(), t, dist.scale)


def visibility(dist: MomentumDistribution, R, t, n_grid=400,
               detect=1e-3, suppress=1e-2) -> FringeReport:
    """Locate the first fringe maximum and the following minimum and report
    ``V = (P_max - P_min) / (P_max + P_min)``.

    The density is scanned from the leading edge backwards; the first local
    maximum with prominence above ``detect`` times the plateau is the main
    fringe and the adjacent minimum at smaller ``x`` its partner (the plateau
    stands in when the density relaxes monotonically).  Both are
    polished by bounded scalar optimisation.  A prominence below
    ``suppress`` times the plateau flags the fringe as suppressed and the
    visibility is reported as zero.
    """
    t = float(_check_times(t))
    m, hbar = dist.scale.mass, dist.scale.hbar
    ell = math.sqrt(math.pi * hbar * t / m)
    pbar = dist.mean()
    xc = pbar * t / m
    spread = dist.sigma * t / m
    lo = xc - 8.0 * ell - 4.0 * spread
    if dist.kind is not DistributionKind.DELTA:
        # mixtures are evaluated on x >= 0; a pure state lives on the whole line
        lo = max(0.0, lo)
    hi = xc + 3.0 * ell + 6.0 * spread
    xs = np.linspace(lo, hi, n_grid)
    dens = mixture_density(dist, R, xs, t)
    plateau = 1.0 if dist.kind is DistributionKind.DELTA else float(dist.upper_mass(0.0))
    alpha = _alpha_for(dist, t)
    rev = dens[::-1]
    peaks, props = find_peaks(rev, prominence=detect * plateau)
    if len(peaks) == 0 or props["prominences"][0] < suppress * plateau:
        prom = float(props["prominences"][0]) if len(peaks) else 0.0
        return FringeReport(math.nan, math.nan, math.nan, math.nan, 0.0, math.nan, alpha,
                            True, prom)
    i_max = len(xs) - 1 - peaks[0]
    dx = xs[1] - xs[0]
    f = lambda xx: float(mixture_density(dist, R, xx, t))
    res_max = minimize_scalar(lambda xx: -f(xx), bounds=(max(lo, xs[i_max] - dx), xs[i_max] + dx),
                              method="bounded", options={"xatol": 1e-9 * ell})
    p_max, x_max = -float(res_max.fun), float(res_max.x)
    troughs, _ = find_peaks(-dens[:i_max + 1])
    if len(troughs):
        i_min = int(troughs[-1])
        res_min = minimize_scalar(f, bounds=(max(lo, xs[i_min] - dx), xs[i_min] + dx),
                                  method="bounded", options={"xatol": 1e-9 * ell})
        p_min, x_min = float(res_min.fun), float(res_min.x)
    else:
        # the fringe relaxes monotonically onto the plateau
        p_min, x_min = plateau, math.nan
    width = math.nan
    try:
        g = lambda xx: f(xx) - plateau
        right = brentq(g, x_max, hi, xtol=1e-10 * ell)
        left = brentq(g, x_min if math.isfinite(x_min) else lo, x_max, xtol=1e-10 * ell)
        width = right - left
    except ValueError:
        pass
    vis = (p_max - p_min) / (p_max + p_min)
    return FringeReport(x_max, x_min, p_max, p_min, vis, width, alpha, False,
                        float(props["prominences"][0]))


# ---------------------------------------------------------------------------
# purity of the chopped mixture

@dataclass(frozen=True)
class PurityReport:
    tau: float
    temperature: Optional[float]
    purity: float
    norm: float


def _momentum_rule(dist, n):
    lo, hi = dist.support()
    return gauss_legendre_panels(lo, hi, 1, order=n)


def chopped_gram(p, tau, scale: PhysicalScale = NATURAL):
    """``<psi^(0)_{p_i,tau}(tau) | psi^(0)_{p_j,tau}(tau)>`` for the momenta `p`.

    Evaluated in position space; at ``t = tau`` the states are released
    plane waves restricted to ``x > 0`` and their common phase cancels.
    """
    p = np.asarray(p, dtype=float)
    length = math.sqrt(scale.hbar * tau / scale.mass)
    a = p * math.sqrt(tau / (scale.mass * scale.hbar))
    xi, wts = _xi_rule(float(np.max(a)))
    gram = np.zeros((p.size, p.size), dtype=complex)
    chunk = 4096
    for k in range(0, xi.size, chunk):
        xk = xi[k:k + chunk]
        W = faddeyeva_w(0.5 * (1 + 1j) * (xk[None, :] - a[:, None]))
        gram += (np.conj(W) * wts[k:k + chunk]) @ W.T
    return 0.25 * length * gram


def _purity_on_rule(dist, tau, n):
    p, w = _momentum_rule(dist, n)
    weights = w * dist.pdf(p)
    gram = chopped_gram(p, tau, dist.scale)
    norm = float(np.sum(weights * np.diag(gram).real))
    if norm < 1e-14:
        raise DegenerateInputError("mixture norm vanishes numerically")
    return float(weights @ (np.abs(gram) ** 2) @ weights) / norm ** 2, norm


def purity(dist: MomentumDistribution, tau, n_nodes=96, rtol=1e-6, max_nodes=2048) -> PurityReport:
    """Purity ``Tr rho^2`` of the normalised mixture of ``R = 0`` pulses.

    ``(1/N^2) sum_ij f_i f_j |<psi_i|psi_j>|^2`` with ``N = sum_i f_i <psi_i|psi_i>``
    on a Gauss-Legendre rule over the support of ``f``.  The rule is checked
    against one with 4/3 as many nodes and doubled until both agree to
    `rtol`; long pulses have narrow overlaps in momentum and need more nodes.

    Raises
    ------
    DegenerateInputError
        If ``N < 1e-14``.
    AccuracyError
        If `max_nodes` is reached without agreement.
    """
    if not tau > 0:
        raise DomainError("tau must be positive")
    if dist.kind is DistributionKind.DELTA:
        nrm = chopped_gram([dist.p_center], tau, dist.scale)[0, 0].real
        if nrm < 1e-14:
            raise DegenerateInputError("pulse norm vanishes numerically")
        return PurityReport(float(tau), None, 1.0, float(nrm))
    n = int(n_nodes)
    while True:
        value, norm = _purity_on_rule(dist, tau, n)
        check, _ = _purity_on_rule(dist, tau, (4 * n) // 3)
        err = abs(check - value)
        if err <= rtol * abs(check):
            return PurityReport(float(tau), dist.temperature, check, norm)
        if 2 * n > max_nodes:
            raise AccuracyError("purity quadrature did not converge", estimate=check, error=err)
        n *= 2


def boundary_kernel(x, t, tp, scale: PhysicalScale = NATURAL):
    """Propagator from the origin into ``x > 0`` for a wave vanishing there initially,

    ``K+(t, x; t', 0) = [m / (i h (t - t')^3)]^(1/2) x exp(i m x^2 / 2 hbar (t - t'))``.
    """
    x = np.asarray(x, dtype=float)
    dt = np.asarray(t, dtype=float) - np.asarray(tp, dtype=float)
    if np.any(dt <= 0):
        raise DomainError("t must exceed t'")
    if np.any(x <= 0):
        raise DomainError("the kernel is defined for x > 0")
    m, hbar = scale.mass, scale.hbar
    amp = np.exp(-0.25j * math.pi) * np.sqrt(m / (2.0 * math.pi * hbar * dt ** 3))
    return amp * x * np.exp(1j * m * x * x / (2.0 * hbar * dt))
