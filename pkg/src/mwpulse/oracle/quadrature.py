"""Adaptive Gauss-Kronrod quadrature for complex integrands.

The integrand is always called with a 1-D array of abscissae and must return
an array of the same length; this keeps every evaluation vectorised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import AccuracyError, DomainError
from ..special_functions import ContourSide, GaussPoleParams

# 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15)
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KRONROD_W = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GAUSS_W = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod nodes xgk[1], xgk[3], xgk[5], xgk[7]
for _j, _k in enumerate((1, 3, 5)):
    _GAUSS_W[_k] = _WG[_j]
    _GAUSS_W[14 - _k] = _WG[_j]
_GAUSS_W[7] = _WG[3]


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    error_estimate: float
    evaluations: int


def _gk_panels(f, lo, hi):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=complex).reshape(x.shape)
    kron = half * (fx @ _KRONROD_W)
    gauss = half * (fx @ _GAUSS_W)
    return kron, np.abs(kron - gauss)


def _finite_adaptive(f, a, b, atol, rtol, max_intervals, initial_panels):
    edges = np.linspace(a, b, initial_panels + 1)
    lo, hi = edges[:-1], edges[1:]
    vals, errs = _gk_panels(f, lo, hi)
    done_val = 0j
    done_err = 0.0
    evaluations = 15 * len(lo)
    total_len = b - a
    while True:
        total = done_val + vals.sum()
        err = done_err + errs.sum()
        tol = max(atol, rtol * abs(total))
        if err <= tol:
            return QuadratureResult(complex(total), float(err), evaluations)
        # a panel is accepted once its error is below its share of the tolerance
        share = 0.5 * tol * (hi - lo) / total_len
        ok = errs <= share
        done_val += vals[ok].sum()
        done_err += errs[ok].sum()
        lo, hi = lo[~ok], hi[~ok]
        if len(lo) == 0:
            total = done_val
            return QuadratureResult(complex(total), float(done_err), evaluations)
        if evaluations // 15 + 2 * len(lo) > max_intervals:
            raise AccuracyError(
                "adaptive_integrate: maximum subdivision exceeded",
                estimate=complex(done_val + vals[~ok].sum()),
                error=float(err),
            )
        mid = 0.5 * (lo + hi)
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
        vals, errs = _gk_panels(f, lo, hi)
        evaluations += 15 * len(lo)


def _wynn_epsilon(partial_sums):
    """Limit of a sequence of partial sums by Wynn's epsilon algorithm."""
    s = [complex(v) for v in partial_sums]
    n = len(s)
    prev = [0j] * (n + 1)
    cur = list(s)
    best = s[-1]
    for k in range(1, n):
        nxt = []
        for j in range(len(cur) - 1):
            diff = cur[j + 1] - cur[j]
            if diff == 0:
                nxt.append(complex(np.inf))
            else:
                nxt.append(prev[j + 1] + 1.0 / diff)
        prev, cur = cur, nxt
        if k % 2 == 0 and cur:
            finite = [c for c in cur if np.isfinite(c)]
            if finite:
                best = finite[-1]
    return best


def adaptive_integrate(f, a, b, tol=1e-10, rtol=0.0, max_intervals=20000,
                       period=None, scale=1.0, initial_panels=8):
    """Integrate ``f`` over ``[a, b]`` with adaptive G7/K15 panels.

    Parameters
    ----------
    f : callable
        Vectorised integrand, real or complex valued.
    a, b : float
        Limits; either may be infinite.  Infinite ranges are mapped to a
        finite interval with ``x = a + scale * tan(pi s / 2)``.
    tol, rtol : float
        Absolute and relative tolerance on the summed error estimate.
    period : float, optional
        For slowly decaying oscillatory integrands on ``[a, inf)``: the
        integral is summed over half-period panels and the partial sums are
        extrapolated with Wynn's epsilon algorithm instead of mapping.
    scale : float
        Length scale of the tangent map.

    Raises
    ------
    AccuracyError
        When the subdivision limit is reached.  The best estimate is attached.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    if a == b:
        return QuadratureResult(0j, 0.0, 0)
    if a > b:
        res = adaptive_integrate(f, b, a, tol, rtol, max_intervals, period, scale, initial_panels)
        return QuadratureResult(-res.value, res.error_estimate, res.evaluations)

    if period is not None:
        if not (math.isfinite(a) and b == math.inf):
            raise DomainError("oscillatory mode needs a finite lower limit and b = inf")
        return _oscillatory_tail(f, a, period, tol, max_intervals)

    if math.isfinite(a) and math.isfinite(b):
        return _finite_adaptive(f, a, b, tol, rtol, max_intervals, initial_panels)

    if math.isfinite(a):
        def g(s):
            t = np.tan(0.5 * math.pi * s)
            return f(a + scale * t) * (0.5 * math.pi * scale) * (1.0 + t * t)
        return _finite_adaptive(g, 0.0, 1.0, tol, rtol, max_intervals, initial_panels)
    if math.isfinite(b):
        def g(s):
            t = np.tan(0.5 * math.pi * s)
            return f(b - scale * t) * (0.5 * math.pi * scale) * (1.0 + t * t)
        return _finite_adaptive(g, 0.0, 1.0, tol, rtol, max_intervals, initial_panels)

    def g(s):
        t = np.tan(0.5 * math.pi * s)
        return f(scale * t) * (0.5 * math.pi * scale) * (1.0 + t * t)
    return _finite_adaptive(g, -1.0, 1.0, tol, rtol, max_intervals, 2 * initial_panels)


def _oscillatory_tail(f, a, period, tol, max_intervals, n_panels=60):
    half = 0.5 * period
    partial = []
    total = 0j
    evaluations = 0
    err = 0.0
    for k in range(n_panels):
        res = _finite_adaptive(f, a + k * half, a + (k + 1) * half,
                               0.1 * tol, 0.0, max_intervals, 2)
        total += res.value
        err += res.error_estimate
        evaluations += res.evaluations
        partial.append(total)
    first = _wynn_epsilon(partial[:-10])
    second = _wynn_epsilon(partial)
    return QuadratureResult(complex(second), float(err + abs(second - first)), evaluations)


@lru_cache(maxsize=64)
def _legendre(order):
    return np.polynomial.legendre.leggauss(order)


def gauss_legendre_panels(a, b, n_panels, order=16):
    """Nodes and weights of a composite Gauss-Legendre rule on ``[a, b]``."""
    x, w = _legendre(order)
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def gauss_pole_quadrature(params: GaussPoleParams, tol=1e-12) -> complex:
    """Brute-force value of the Gaussian-pole integral.

    The real line is rotated onto the steepest-descent line
    ``p = b / 2a + exp(-i pi/4) s`` through the saddle; poles swept over on
    the way are added back as residues.  Nothing here uses ``w``.
    """
    a, b = params.a, params.b
    poles = [complex(p) for p in params.poles]
    ps = b / (2.0 * a)
    rot = np.exp(-0.25j * math.pi)

    def integrand(s):
        p = ps + rot * s
        val = np.exp(-1j * a * p * p + 1j * b * p)
        for pk in poles:
            val = val / (p - pk)
        return val * rot

    width = 1.0 / math.sqrt(a)
    value = adaptive_integrate(integrand, -math.inf, math.inf, tol=tol, scale=width).value

    above = params.side is ContourSide.ABOVE_POLES
    for k, pk in enumerate(poles):
        residue = np.exp(-1j * a * pk * pk + 1j * b * pk)
        for j, pj in enumerate(poles):
            if j != k:
                residue /= pk - pj
        # a contour above a pole is the real line with the pole nudged down
        imag = pk.imag if pk.imag != 0.0 else (-0.0 if above else 0.0)
        rel_re = pk.real - ps
        if rel_re == 0.0 and pk.imag == 0.0:
            raise DomainError("pole at the saddle point")
        angle = math.atan2(imag, rel_re)
        # real line -> steepest-descent line: swept sectors
        if -0.25 * math.pi < angle < 0.0 or (imag == 0.0 and rel_re > 0 and math.copysign(1, imag) < 0):
            value -= 2j * math.pi * residue
        elif 0.75 * math.pi < angle < math.pi or (imag == 0.0 and rel_re < 0 and math.copysign(1, imag) > 0):
            value += 2j * math.pi * residue
        # real line -> contour on the requested side of off-axis poles
        if above and pk.imag > 0:
            value -= 2j * math.pi * residue
        elif not above and pk.imag < 0:
            value += 2j * math.pi * residue
    return complex(value)
