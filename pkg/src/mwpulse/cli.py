"""Command-line front end: figure data as CSV and the oracle validation suite.

Configuration is resolved as flags > config file > defaults.  The config file
holds ``key=value`` lines using the long flag names (``p0-over-m = 0.1``); its
path comes from ``--config`` or the ``MWPULSE_CONFIG`` environment variable.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .apodization import (
    ApertureWindow,
    WindowKind,
    apodized_pulse,
    shifted_momentum,
    spectral_norm,
    uncertainty_knee,
    uncertainty_product,
    window_value,
)
from .ensembles import MomentumDistribution, purity, visibility
from .errors import AccuracyError, DomainError, MatterWaveError
from .pulse import overlap_scan
from .shutter import cornu_density, cornu_spiral_samples
from .units import SPECIES_MASS_U, PhysicalScale

CONFIG_ENV = "MWPULSE_CONFIG"

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_CONFIG = 2


class ConfigError(Exception):
    """Invalid or inconsistent configuration (exit code 2)."""


DEFAULTS = {
    "units": "si",
    "species": "argon",
    "p0_over_m": 0.1,
    "tau": 10e-6,
    "t": 200e-6,
    "temp": "1e-6",
    "reflectivity": 0.0,
    "window": "rectangular",
    "out": "-",
    "threads": 1,
    "tol": None,
}


@dataclass
class RunConfig:
    units: str
    species: str
    p0_over_m: float
    tau: float
    t: float
    temperatures: List[float]
    reflectivity: float
    window: str
    out: str
    threads: int
    tol: Optional[float]
    extra: Dict[str, object] = field(default_factory=dict)

    @property
    def scale(self) -> PhysicalScale:
        if self.units == "natural":
            return PhysicalScale.natural()
        return PhysicalScale.species(self.species)

    @property
    def p0(self):
        return self.scale.mass * self.p0_over_m

    def metadata(self):
        items = [("units", self.units), ("species", self.species), ("p0_over_m", self.p0_over_m),
                 ("tau", self.tau), ("t", self.t),
                 ("temp", ",".join(repr(v) for v in self.temperatures)),
                 ("reflectivity", self.reflectivity), ("window", self.window),
                 ("threads", self.threads), ("tol", self.tol)]
        items += sorted(self.extra.items())
        return items


def read_config_file(path) -> Dict[str, str]:
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _as_float(key, value):
    try:
        v = float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} must be a number, got {value!r}") from exc
    if not math.isfinite(v):
        raise ConfigError(f"{key} must be finite")
    return v


def _float_list(key, value):
    if isinstance(value, (list, tuple)):
        return [_as_float(key, v) for v in value]
    return [_as_float(key, v) for v in str(value).split(",") if v.strip()]


def resolve_config(args: argparse.Namespace, env=None) -> RunConfig:
    env = os.environ if env is None else env
    merged = dict(DEFAULTS)
    path = getattr(args, "config", None) or env.get(CONFIG_ENV)
    if path:
        merged.update(read_config_file(path))
    for key, value in vars(args).items():
        if value is not None and key not in ("command", "config", "func"):
            merged[key] = value

    units = str(merged["units"]).lower()
    if units not in ("natural", "si"):
        raise ConfigError("units must be 'natural' or 'si'")
    species = str(merged["species"]).lower()
    if units == "si" and species not in SPECIES_MASS_U:
        raise ConfigError(f"unknown species {species!r}; choose from {sorted(SPECIES_MASS_U)}")
    window = str(merged["window"]).lower().replace("-", "_")
    if window not in {k.value for k in WindowKind}:
        raise ConfigError(f"unknown window {window!r}")
    p0m = _as_float("p0-over-m", merged["p0_over_m"])
    tau = _as_float("tau", merged["tau"])
    t = _as_float("t", merged["t"])
    if p0m <= 0 or tau <= 0 or t <= 0:
        raise ConfigError("p0-over-m, tau and t must be positive")
    temps = _float_list("temp", merged["temp"])
    if not temps or any(v <= 0 for v in temps):
        raise ConfigError("temperatures must be positive")
    refl = _as_float("reflectivity", merged["reflectivity"])
    try:
        threads = int(merged["threads"])
    except (TypeError, ValueError) as exc:
        raise ConfigError("threads must be an integer") from exc
    if threads < 1:
        raise ConfigError("threads must be at least 1")
    tol = merged["tol"]
    if tol is not None:
        tol = _as_float("tol", tol)
        if not 0 < tol < 1:
            raise ConfigError("tol must lie in (0, 1)")
    known = set(DEFAULTS) | {"temp"}
    extra = {k: v for k, v in merged.items() if k not in known}
    return RunConfig(units, species, p0m, tau, t, temps, refl, window, str(merged["out"]),
                     threads, tol, extra)


def _sweep(cfg: RunConfig, key, default_lo, default_hi, default_n, log=True):
    rng = cfg.extra.get(f"{key}_range")
    count = cfg.extra.get("count")
    lo, hi = (default_lo, default_hi) if rng is None else _float_list(f"{key}-range", rng)[:2]
    n = default_n if count is None else int(count)
    if not lo < hi:
        raise ConfigError(f"{key}-range needs min < max")
    if n < 2:
        raise ConfigError("count must be at least 2")
    if log:
        if lo <= 0:
            raise ConfigError(f"{key}-range must be positive for a log sweep")
        return np.logspace(math.log10(lo), math.log10(hi), n)
    return np.linspace(lo, hi, n)


def _parallel_map(cfg: RunConfig, fn: Callable, items: Sequence):
    if cfg.threads == 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# CSV output

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    if isinstance(v, (list, tuple, np.ndarray)):
        return " ".join(_fmt(e) for e in v)
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.12g}"


def write_csv(cfg: RunConfig, command, header, rows, extra_meta=()):
    lines = [f"# mwpulse {__version__} {command}"]
    for k, v in list(cfg.metadata()) + list(extra_meta):
        lines.append(f"# {k}={_fmt(v) if not isinstance(v, str) else v}")
    close = False
    if cfg.out == "-":
        fh = sys.stdout
    else:
        try:
            fh = open(cfg.out, "w", newline="", encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot write {cfg.out!r}: {exc}") from exc
        close = True
    try:
        for line in lines:
            fh.write(line + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    finally:
        if close:
            fh.close()
        else:
            fh.flush()


# ---------------------------------------------------------------------------
# commands

def cmd_fringe(cfg: RunConfig):
    theta = _sweep(cfg, "theta", -2.0, 6.0, 801, log=False)
    s = cfg.scale
    x = cfg.p0_over_m * cfg.t - np.sqrt(math.pi * s.hbar * cfg.t / s.mass) * theta
    P = cornu_density(theta)
    write_csv(cfg, "fringe", ["theta", "x", "P"], zip(theta, x, P))


def cmd_cornu(cfg: RunConfig):
    rng = cfg.extra.get("theta_range")
    lo, hi = (-5.0, 5.0) if rng is None else _float_list("theta-range", rng)[:2]
    n = int(cfg.extra.get("count") or 1001)
    if not lo < hi or n < 2:
        raise ConfigError("theta-range needs min < max and count >= 2")
    theta, rows = cornu_spiral_samples(lo, hi, n)
    write_csv(cfg, "cornu", ["theta", "C", "S", "P"],
              ([th] + list(r) for th, r in zip(theta, rows)))


def _distribution(cfg, T):
    kind = str(cfg.extra.get("distribution", "maxwell")).lower()
    s = cfg.scale
    if kind in ("maxwell", "maxwell_boltzmann", "mb"):
        return MomentumDistribution.maxwell_boltzmann(T, cfg.p0, s)
    if kind in ("effusive", "effusive_beam", "beam"):
        return MomentumDistribution.effusive_beam(T, s)
    if kind == "delta":
        return MomentumDistribution.delta(cfg.p0, s)
    raise ConfigError(f"unknown distribution {kind!r}")


def cmd_visibility(cfg: RunConfig):
    lo, hi = (1e-9, 1e-6) if cfg.units == "si" else (1e-3, 10.0)
    temps = _sweep(cfg, "temp", lo, hi, 12)
    refls = (-1.0, 0.0, 1.0)

    def point(T):
        import warnings
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            reps = [visibility(_distribution(cfg, T), R, cfg.t) for R in refls]
        return [T, reps[1].alpha] + [r.visibility for r in reps] + [r.suppressed for r in reps]

    rows = _parallel_map(cfg, point, temps)
    write_csv(cfg, "visibility",
              ["T", "alpha", "V_Rm1", "V_R0", "V_R1", "suppressed_Rm1", "suppressed_R0", "suppressed_R1"],
              rows, [("distribution", str(cfg.extra.get("distribution", "maxwell")))])


def cmd_purity(cfg: RunConfig):
    lo, hi = (1e-9, 1e-5) if cfg.units == "si" else (1e-3, 100.0)
    taus = _sweep(cfg, "tau", lo, hi, 25)
    rtol = cfg.tol if cfg.tol is not None else 1e-6
    dists = [MomentumDistribution.effusive_beam(T, cfg.scale) for T in cfg.temperatures]
    rows = []
    partial = False
    try:
        for tau in taus:
            vals = _parallel_map(cfg, lambda d: purity(d, tau, rtol=rtol).purity, dists)
            rows.append([tau] + vals)
    except AccuracyError:
        partial = True
    header = ["tau"] + [f"purity_T={_fmt(T)}" for T in cfg.temperatures]
    write_csv(cfg, "purity", header, rows, [("distribution", "effusive_beam"), ("partial", partial)])
    if partial:
        raise AccuracyError("purity quadrature did not converge; partial output written")


def cmd_overlap(cfg: RunConfig):
    actions = _sweep(cfg, "action", 1e-2, 1e2, 200)
    pairs = ((-1.0, 1.0), (0.0, -1.0), (0.0, 1.0))

    def label(r):
        return "m%g" % -r if r < 0 else "%g" % r

    header = ["S_over_hbar"] + ["O_%s_%s" % (label(r), label(rp)) for r, rp in pairs]
    values = _parallel_map(cfg, lambda a: overlap_scan([a], pairs)[0], actions)
    rows = [[a] + list(v) for a, v in zip(actions, values)]
    write_csv(cfg, "overlap", header, rows)


def cmd_pulse(cfg: RunConfig):
    s = cfg.scale
    win = ApertureWindow(WindowKind(cfg.window), cfg.tau)
    p0 = cfg.p0
    profile = str(cfg.extra.get("profile", "x"))
    if profile == "t":
        x = float(cfg.extra.get("x", 0.0))
        ts = _sweep(cfg, "t", cfg.tau * 1e-3, 3.0 * cfg.tau, int(cfg.extra.get("count") or 600), log=False)
        psi = apodized_pulse(win, p0, x, ts, s)
        write_csv(cfg, "pulse", ["t", "density", "window_squared"],
                  zip(ts, np.abs(psi) ** 2, window_value(win, ts) ** 2), [("x", x)])
        return
    ell = math.sqrt(math.pi * s.hbar * cfg.t / s.mass)
    xc = p0 * cfg.t / s.mass
    markers = [shifted_momentum(p0, k * win.omega, s) for k in (-1, 0, 1)]
    markers = [m.real * cfg.t / s.mass for m in markers]
    if win.periodic:
        lo, hi = max(0.0, markers[0] - 6 * ell), markers[2] + 6 * ell
    else:
        span = p0 * cfg.tau / s.mass + 8.0 * ell
        lo, hi = max(0.0, xc - span), xc + span
    xs = _sweep(cfg, "x", lo, hi, int(cfg.extra.get("count") or 1500), log=False)
    dens = np.abs(apodized_pulse(win, p0, xs, cfg.t, s)) ** 2
    meta = []
    if not win.periodic:
        dens = dens / spectral_norm(win, p0, s)
        meta.append(("normalised", True))
    else:
        meta.append(("normalised", False))
    rows = ([x, d] + markers for x, d in zip(xs, dens))
    write_csv(cfg, "pulse", ["x", "density", "x_p_minus", "x_p0", "x_p_plus"], rows, meta)


def cmd_uncertainty(cfg: RunConfig):
    s = cfg.scale
    top = s.crossover_time(cfg.p0)
    taus = _sweep(cfg, "tau", 0.01 * top, 30.0 * top, 40)

    def point(tau):
        rect = uncertainty_product(ApertureWindow(WindowKind.RECTANGULAR, tau), cfg.p0, scale=s)
        sine = uncertainty_product(ApertureWindow(WindowKind.SINE, tau), cfg.p0, scale=s)
        return [tau, sine.product_fwhm / s.hbar, sine.product_sigma / s.hbar,
                rect.product_fwhm / s.hbar, rect.divergent]

    rows = _parallel_map(cfg, point, taus)
    knee_r = uncertainty_knee(taus, [r[3] for r in rows])
    knee_s = uncertainty_knee(taus, [r[1] for r in rows])
    write_csv(cfg, "uncertainty",
              ["tau", "sine_fwhm_tau_over_hbar", "sine_sigma_tau_over_hbar",
               "rect_fwhm_tau_over_hbar", "rect_sigma_divergent"],
              rows, [("crossover_time", top), ("knee_rectangular", knee_r), ("knee_sine", knee_s)])


# ---------------------------------------------------------------------------
# validation suite

@dataclass
class CheckResult:
    name: str
    error: float
    threshold: float
    seconds: float

    @property
    def passed(self):
        return math.isfinite(self.error) and self.error <= self.threshold


def _check_w(rng, n=10000):
    from scipy.special import wofz

    from .special_functions import faddeyeva_derivatives, faddeyeva_w
    z = rng.uniform(-8, 8, n) + 1j * rng.uniform(-4, 8, n)
    w = faddeyeva_w(z)
    scale = np.maximum(1.0, np.abs(w))
    errs = [np.max(np.abs(faddeyeva_w(-np.conj(z)) - np.conj(w)) / scale),
            np.max(np.abs(w - wofz(z)) / scale)]
    # derivative identity against a Cauchy integral on a small circle
    zc = z[:500]
    k = np.arange(64)
    ring = 0.25 * np.exp(2j * math.pi * k / 64)
    vals = faddeyeva_w(zc[:, None] + ring[None, :])
    d_cauchy = np.mean(vals / ring[None, :], axis=1)
    d_rec = faddeyeva_derivatives(zc, 1)[1]
    errs.append(np.max(np.abs(d_cauchy - d_rec) / np.maximum(1.0, np.abs(d_rec))))
    return float(max(errs))


def _check_gauss_pole(rng, n=100):
    from .oracle.quadrature import gauss_pole_quadrature
    from .special_functions import ContourSide, GaussPoleParams, gauss_pole_integral
    worst = 0.0
    for _ in range(n):
        side = ContourSide.ABOVE_POLES if rng.random() < 0.5 else ContourSide.BELOW_POLES
        par = GaussPoleParams(float(rng.uniform(0.1, 3)), float(rng.uniform(-5, 5)),
                              (complex(rng.uniform(-3, 3)),), side)
        a = gauss_pole_integral(par)
        b = gauss_pole_quadrature(par)
        worst = max(worst, abs(a - b) / max(1.0, abs(a)))
    return worst


def _check_source(rng, n=1000):
    from .shutter import ShutterState, moshinsky_psi, source_psi
    x = rng.uniform(0, 5, n)
    t = rng.uniform(0.05, 5, n)
    p = 1.3
    return float(np.max(np.abs(source_psi(p, x, t) - moshinsky_psi(ShutterState(1.0, p), x, t))))


def _check_source_pulse(rng, n=40):
    from .pulse import ContourSpec, PulseSpec, evolve_pulse_spectral, source_pulse
    p = 1.3
    spec = PulseSpec(1.0, p, 1.0)
    worst = 0.0
    for xi, ti in zip(rng.uniform(0, 3, n), rng.uniform(1.5, 4.0, n)):
        a = source_pulse(p, 1.0, xi, ti)
        b = evolve_pulse_spectral(spec, np.array([xi]), ti, ContourSpec())[0]
        worst = max(worst, abs(a - b))
    return float(worst)


def _check_grid(rng):
    from .oracle.grid import shutter_release_error
    return shutter_release_error(0.02)


def _check_parseval(rng):
    from .pulse import PulseSpec, pulse_norm
    worst = 0.0
    for R in (-1.0, 0.0, 1.0):
        spec = PulseSpec(R, 2.0, 1.0)
        a, b = pulse_norm(spec, "position"), pulse_norm(spec, "energy")
        worst = max(worst, abs(a - b) / a)
    return worst


CHECKS = {
    "w": (_check_w, 1e-13),
    "gauss_pole": (_check_gauss_pole, 1e-8),
    "source": (_check_source, 1e-10),
    "source_pulse": (_check_source_pulse, 1e-8),
    "grid": (_check_grid, 1e-3),
    "parseval": (_check_parseval, 1e-6),
}


def run_checks(names, tol=None, seed=12345) -> List[CheckResult]:
    rng = np.random.default_rng(seed)
    out = []
    for name in names:
        fn, thr = CHECKS[name]
        t0 = time.perf_counter()
        err = fn(rng)
        out.append(CheckResult(name, float(err), thr if tol is None else tol,
                               time.perf_counter() - t0))
    return out


def cmd_validate(cfg: RunConfig):
    only = cfg.extra.get("only")
    names = list(CHECKS) if not only else [s.strip() for s in str(only).split(",") if s.strip()]
    bad = [n for n in names if n not in CHECKS]
    if bad:
        raise ConfigError(f"unknown checks {bad}; available: {sorted(CHECKS)}")
    results = run_checks(names, cfg.tol)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name:<11} error={r.error:.3e} "
              f"threshold={r.threshold:.1e} ({r.seconds:.2f} s)")
    if not all(r.passed for r in results):
        raise AccuracyError("validation failed")


COMMANDS = {
    "fringe": (cmd_fringe, "main fringe P(theta) and its position"),
    "cornu": (cmd_cornu, "Cornu spiral samples (C, S, P)"),
    "visibility": (cmd_visibility, "fringe visibility over a temperature sweep"),
    "purity": (cmd_purity, "purity of a chopped effusive beam over an opening-time sweep"),
    "overlap": (cmd_overlap, "overlap probabilities over a log sweep of S/hbar"),
    "pulse": (cmd_pulse, "density profile of an apodized pulse"),
    "uncertainty": (cmd_uncertainty, "energy-width times opening time over a tau sweep"),
    "validate": (cmd_validate, "oracle cross-check suite"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("configuration")
    g.add_argument("--config", help=f"key=value config file (default: ${CONFIG_ENV})")
    g.add_argument("--units", choices=["natural", "si"])
    g.add_argument("--species", help="species preset (argon, sodium, neutron)")
    g.add_argument("--p0-over-m", dest="p0_over_m", type=float, help="source velocity")
    g.add_argument("--tau", type=float, help="opening time")
    g.add_argument("--t", type=float, help="observation time")
    g.add_argument("--temp", help="temperature, or comma-separated list")
    g.add_argument("--reflectivity", type=float)
    g.add_argument("--window", help="rectangular, sine, hanning, blackman, periodic_hanning")
    g.add_argument("--out", help="output path ('-' for stdout)")
    g.add_argument("--threads", type=int)
    g.add_argument("--tol", type=float)
    g.add_argument("--count", type=int, help="number of sweep points")

    parser = argparse.ArgumentParser(prog="mwpulse", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"mwpulse {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "fringe": [("--theta-range", 2)],
        "cornu": [("--theta-range", 2)],
        "visibility": [("--temp-range", 2), ("--distribution", None)],
        "purity": [("--tau-range", 2)],
        "overlap": [("--action-range", 2)],
        "pulse": [("--x-range", 2), ("--t-range", 2), ("--profile", None), ("--x", None)],
        "uncertainty": [("--tau-range", 2)],
        "validate": [("--only", None)],
    }
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        for flag, nargs in specs[name]:
            if nargs:
                p.add_argument(flag, nargs=nargs, type=float, metavar=("MIN", "MAX"))
            else:
                p.add_argument(flag)
    return parser


def main(argv=None, env=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = resolve_config(args, env)
        COMMANDS[args.command][0](cfg)
    except (ConfigError, DomainError) as exc:
        print(f"mwpulse: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (MatterWaveError, ArithmeticError) as exc:
        print(f"mwpulse: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
