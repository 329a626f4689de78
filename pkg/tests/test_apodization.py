import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mwpulse.apodization import (
    ApertureWindow,
    SpreadMeasure,
    WindowKind,
    apodized_pulse,
    boundary_kernel_pulse,
    boundary_spectrum,
    decomposition,
    energy_distribution,
    energy_fwhm,
    energy_moments,
    momentum_ladder,
    normalised_density,
    shifted_momentum,
    sidelobe_report,
    spectral_norm,
    uncertainty_knee,
    uncertainty_product,
    window_value,
)
from mwpulse.errors import DomainError
from mwpulse.oracle import adaptive_integrate, gauss_legendre_panels
from mwpulse.pulse import source_pulse
from mwpulse.units import ARGON

SINGLE = (WindowKind.RECTANGULAR, WindowKind.SINE, WindowKind.HANNING, WindowKind.BLACKMAN)
P0_ARGON = ARGON.mass * 0.1


# -- windows ------------------------------------------------------------------------

def test_window_examples():
    han = ApertureWindow(WindowKind.HANNING, 2.0)
    blk = ApertureWindow(WindowKind.BLACKMAN, 2.0)
    assert window_value(han, 1.0) == pytest.approx(1.0, abs=1e-15)
    assert window_value(blk, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert window_value(blk, 2.0) == pytest.approx(0.0, abs=1e-15)
    assert window_value(blk, 1.0) == pytest.approx(1.0, abs=1e-15)
    assert window_value(ApertureWindow(WindowKind.SINE, 2.0), 0.5) == pytest.approx(math.sin(math.pi / 4))


@pytest.mark.parametrize("kind", list(WindowKind))
def test_window_range_and_support(kind):
    win = ApertureWindow(kind, 1.5)
    t = np.linspace(0, 1.5, 1001)
    v = window_value(win, t)
    assert np.all(v >= -1e-15) and np.all(v <= 1 + 1e-15)
    outside = window_value(win, np.array([-0.5, 2.2]))
    if kind is WindowKind.PERIODIC_HANNING:
        assert outside[0] == 0.0
        assert outside[1] == pytest.approx(math.sin(math.pi * 2.2 / 1.5) ** 2)
    else:
        assert np.all(outside == 0.0)


def test_window_validation():
    with pytest.raises(DomainError):
        ApertureWindow(WindowKind.SINE, 0.0)
    with pytest.raises(DomainError):
        ApertureWindow(WindowKind.SINE, math.inf)


# -- ladders and decompositions --------------------------------------------------

def test_momentum_ladder_branch():
    lad = momentum_ladder(1.0, 1.0)
    assert lad.p0 == 1.0
    assert lad.p_plus == pytest.approx(math.sqrt(1 + 2 * math.pi))
    # w0 - Omega < 0: evanescent, on the branch Im p >= 0
    assert lad.p_minus.real == pytest.approx(0.0, abs=1e-15) and lad.p_minus.imag > 0
    assert lad.p_gamma_minus.imag == pytest.approx(math.sqrt(8 * math.pi - 1))


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 10.0), st.floats(-50.0, 50.0))
def test_shifted_momentum_squares_back(p0, shift):
    q = shifted_momentum(p0, shift)
    assert abs(q * q - (p0 * p0 + 2 * shift)) <= 1e-12 * max(1.0, p0 * p0 + 2 * abs(shift))
    assert q.imag >= 0


def test_decomposition_weights_reproduce_window():
    t = np.linspace(0, 1, 50)
    for kind in SINGLE:
        win = ApertureWindow(kind, 1.0)
        chi = sum(c * np.exp(-1j * (pk * pk / 2 - 2.0) * t) for c, pk in decomposition(win, 2.0))
        assert np.max(np.abs(chi - window_value(win, t))) <= 1e-13


def test_sine_window_is_two_source_pulses():
    win = ApertureWindow(WindowKind.SINE, 1.0)
    lad = momentum_ladder(3.0, 1.0)
    x, t = np.linspace(0, 5, 11), 1.7
    pair = 0.5j * (source_pulse(lad.p_plus, 1.0, x, t) - source_pulse(lad.p_minus, 1.0, x, t))
    assert np.array_equal(apodized_pulse(win, 3.0, x, t), pair)


@pytest.mark.parametrize("kind", SINGLE)
@pytest.mark.parametrize("p0", [3.0, 1.0])
def test_decomposition_against_boundary_integral(kind, p0):
    # p0 = 1 with tau = 1 puts the down-shifted momenta on the evanescent branch
    win = ApertureWindow(kind, 1.0)
    for x, t in ((0.5, 1.5), (2.0, 2.0), (4.0, 3.0), (1.0, 6.0)):
        assert abs(apodized_pulse(win, p0, x, t) - boundary_kernel_pulse(win, p0, x, t)) <= 1e-8


def test_boundary_integral_argon_units():
    win = ApertureWindow(WindowKind.HANNING, 10e-6)
    x, t = 19.6e-6, 200e-6
    a = apodized_pulse(win, P0_ARGON, x, t, ARGON)
    b = boundary_kernel_pulse(win, P0_ARGON, x, t, ARGON)
    assert abs(a - b) <= 1e-8 * abs(a)


def test_boundary_integral_domain():
    with pytest.raises(DomainError):
        boundary_kernel_pulse(ApertureWindow(WindowKind.SINE, 1.0), 1.0, 1.0, 0.5)
    with pytest.raises(DomainError):
        boundary_kernel_pulse(ApertureWindow(WindowKind.PERIODIC_HANNING, 1.0), 1.0, 1.0, 2.0)


@pytest.mark.parametrize("kind", list(WindowKind))
def test_boundary_fidelity(kind):
    win = ApertureWindow(kind, 1.0)
    t = np.linspace(1e-3, 3.0, 1000)
    expected = window_value(win, t) * np.exp(-0.5j * 2.0 ** 2 * t)
    assert np.max(np.abs(apodized_pulse(win, 2.0, 0.0, t) - expected)) <= 1e-10


# -- sidelobes and normalisation ---------------------------------------------------

@pytest.fixture(scope="module")
def argon_reports():
    return {k: sidelobe_report(ApertureWindow(k, 10e-6), P0_ARGON, 200e-6, ARGON) for k in SINGLE}


def test_sidelobe_ordering(argon_reports):
    lobes = [argon_reports[k].largest for k in SINGLE]
    assert lobes[0] > lobes[1] > lobes[2] > lobes[3]


def test_blackman_main_peak_is_advanced(argon_reports):
    xs = [argon_reports[k].main.x for k in SINGLE]
    assert xs[3] > xs[0]
    assert all(a < b for a, b in zip(xs, xs[1:]))


def test_sidelobes_trail_the_main_peak(argon_reports):
    for rep in argon_reports.values():
        assert all(pk.x < rep.main.x and pk.density < rep.main.density for pk in rep.lobes)


@pytest.mark.parametrize("kind", [WindowKind.SINE, WindowKind.HANNING, WindowKind.BLACKMAN])
def test_unit_normalisation(kind):
    win = ApertureWindow(kind, 1.0)
    x, w = gauss_legendre_panels(0.0, 200.0, 6000, order=16)
    total = np.sum(w * normalised_density(win, 3.0, x, 1.5))
    assert abs(total - 1.0) <= 1e-8


def test_unit_normalisation_rectangular():
    # the sudden window leaves a 1/x^2 tail; close it analytically
    win = ApertureWindow(WindowKind.RECTANGULAR, 1.0)
    X = 400.0
    x, w = gauss_legendre_panels(0.0, X, 12000, order=16)
    dens = normalised_density(win, 3.0, x, 1.5)
    edge = np.mean(normalised_density(win, 3.0, np.linspace(0.95 * X, X, 400), 1.5))
    assert abs(np.sum(w * dens) + edge * X - 1.0) <= 1e-4


def test_spectral_norm_equals_position_norm_at_closing():
    # at t = tau the whole pulse lies on [0, p_max tau] up to Fresnel tails
    win = ApertureWindow(WindowKind.BLACKMAN, 1.0)
    f = lambda x: np.abs(apodized_pulse(win, 3.0, x, 1.0)) ** 2
    pos = adaptive_integrate(f, 0.0, 60.0, tol=1e-12).value.real
    assert abs(pos - spectral_norm(win, 3.0)) <= 1e-8


def test_sidelobe_domain():
    with pytest.raises(DomainError):
        sidelobe_report(ApertureWindow(WindowKind.SINE, 1.0), 1.0, 0.5)
    with pytest.raises(DomainError):
        sidelobe_report(ApertureWindow(WindowKind.PERIODIC_HANNING, 1.0), 1.0, 2.0)


def test_periodic_forerunner():
    tau, t = 10e-6, 1.2e-3
    win = ApertureWindow(WindowKind.PERIODIC_HANNING, tau)
    lad = momentum_ladder(P0_ARGON, tau, ARGON)
    marks = [abs(q) * t / ARGON.mass for q in (lad.p_minus, lad.p0, lad.p_plus)]
    assert marks[0] < marks[1] < marks[2]
    x = np.linspace(60e-6, 160e-6, 2001)
    dens = np.abs(apodized_pulse(win, P0_ARGON, x, t, ARGON)) ** 2
    front = x[np.nonzero(dens > 0.01 * 0.25)[0][-1]]
    # the leading edge runs ahead of the p0 point, out to the fastest component
    assert marks[2] < front <= 1.02 * abs(lad.p_beta_plus) * t / ARGON.mass


# -- energy distribution ------------------------------------------------------------

def test_boundary_spectrum_rectangular_closed_form():
    win = ApertureWindow(WindowKind.RECTANGULAR, 1.3)
    nu = np.array([-4.0, -0.1, 0.7, 9.0])
    expected = (np.exp(1j * nu * 1.3) - 1) / (1j * nu)
    assert np.allclose(boundary_spectrum(win, nu), expected, atol=1e-15)
    assert boundary_spectrum(win, 0.0) == pytest.approx(1.3)


def test_rectangular_distribution_formula_and_limit():
    win = ApertureWindow(WindowKind.RECTANGULAR, 1.0)
    E = 2.0
    Ep = np.array([0.3, 1.1, 2.9, 5.0])
    P = energy_distribution(win, E, Ep)
    shape = np.sqrt(Ep) * np.sin((E - Ep) / 2) ** 2 / (E - Ep) ** 2
    n = P / shape
    assert np.allclose(n, n[0], rtol=1e-12)
    # removable point: N sqrt(E) tau^2 / 4
    at = energy_distribution(win, E, np.array([E]))[0]
    assert at == pytest.approx(n[0] * math.sqrt(E) / 4, rel=1e-12)
    near = energy_distribution(win, E, np.array([E + 1e-6]))[0]
    assert abs(near - at) < 1e-6 * at


def test_sine_distribution_normalised():
    win = ApertureWindow(WindowKind.SINE, 1.0)
    E = 5.0
    x, w = gauss_legendre_panels(0.0, 3000.0, 20000, order=16)
    total = np.sum(w * energy_distribution(win, E, x))
    # tail beyond 3000: density ~ sqrt(E') nu^-4 (edge slopes)
    assert abs(total - 1.0) <= 1e-6


def test_rectangular_distribution_normalised():
    win = ApertureWindow(WindowKind.RECTANGULAR, 1.0)
    E, cut = 5.0, 3000.0
    x, w = gauss_legendre_panels(0.0, cut, 20000, order=16)
    total = np.sum(w * energy_distribution(win, E, x))
    # oscillation-averaged tail: sqrt(E') * 2 / (E' - E)^2, same normalisation constant
    scale = energy_distribution(win, E, np.array([1.1]))[0] / (math.sqrt(1.1) * abs(boundary_spectrum(win, 1.1 - E)) ** 2)
    # int_cut^inf sqrt(e) / (e - E)^2 de in closed form
    rc, rE = math.sqrt(cut), math.sqrt(E)
    tail = 2 * (rc / (cut - E) - math.log((rc - rE) / (rc + rE)) / (2 * rE))
    assert abs(total + scale * tail - 1.0) <= 1e-6


def test_energy_distribution_domain():
    win = ApertureWindow(WindowKind.SINE, 1.0)
    with pytest.raises(DomainError):
        energy_distribution(win, -1.0, 1.0)
    with pytest.raises(DomainError):
        energy_distribution(win, 1.0, [-0.5])


def test_rectangular_variance_grows_without_bound():
    win = ApertureWindow(WindowKind.RECTANGULAR, 1.0)
    E = 2.0
    v = [energy_moments(win, E, cutoff=L * E)[1] for L in (1e2, 1e3, 1e4)]
    # sqrt(E') / E'^2 weight: the truncated second moment grows like cutoff^(3/2)
    r1, r2 = v[1] / v[0], v[2] / v[1]
    assert 10 ** 1.3 < r1 < 10 ** 1.7 and 10 ** 1.3 < r2 < 10 ** 1.7
    assert energy_moments(win, E)[1] == math.inf


def test_sine_variance_finite():
    win = ApertureWindow(WindowKind.SINE, 1.0)
    E = 2.0
    full = energy_moments(win, E)[1]
    v = [energy_moments(win, E, cutoff=L * E)[1] for L in (1e2, 1e3, 1e4)]
    assert math.isfinite(full)
    assert v[0] < v[1] < v[2] < full
    assert full - v[2] < 0.05 * full


def test_uncertainty_product_flags():
    rect = uncertainty_product(ApertureWindow(WindowKind.RECTANGULAR, 1.0), 2.0)
    sine = uncertainty_product(ApertureWindow(WindowKind.SINE, 1.0), 2.0, SpreadMeasure.SIGMA)
    assert rect.divergent and rect.sigma is None and rect.product_sigma is None
    assert not sine.divergent and sine.product == pytest.approx(sine.sigma * 1.0)
    assert rect.fwhm > 0 and sine.fwhm > rect.fwhm
    assert rect.crossover_time == pytest.approx(2 * math.pi / 4.0)
    with pytest.raises(DomainError):
        uncertainty_product(ApertureWindow(WindowKind.PERIODIC_HANNING, 1.0), 2.0)


def test_rectangular_fwhm_long_pulse():
    # far above the crossover the sqrt(E') factor is flat: sinc^2 half width 2 * 1.39156 hbar / tau
    win = ApertureWindow(WindowKind.RECTANGULAR, 1.0)
    assert energy_fwhm(win, 1e6) == pytest.approx(4 * 1.3915573, rel=1e-5)


def test_crossover_time_argon():
    assert ARGON.crossover_time(P0_ARGON) == pytest.approx(0.99888e-6, rel=1e-4)


@pytest.mark.parametrize("kind", [WindowKind.RECTANGULAR, WindowKind.SINE])
def test_uncertainty_product_shape_and_knee(kind):
    top = ARGON.crossover_time(P0_ARGON)
    taus = np.geomspace(0.01 * top, 30 * top, 40)
    prod = np.array([uncertainty_product(ApertureWindow(kind, tau), P0_ARGON, scale=ARGON).product_fwhm
                     for tau in taus]) / ARGON.hbar
    assert np.all(np.diff(prod) >= -1e-9 * prod[1:])
    # linear growth in tau at first, then a flat plateau
    first = (prod[5] - prod[0]) / (taus[5] - taus[0])
    last = (prod[-1] - prod[-6]) / (taus[-1] - taus[-6])
    assert first > 0 and 0 <= last < 1e-2 * first
    knee = uncertainty_knee(taus, prod)
    assert top / 3 <= knee <= 3 * top
