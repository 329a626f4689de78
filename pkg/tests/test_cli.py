import csv
import math

import numpy as np
import pytest

from mwpulse.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main


def _run(tmp_path, *args, env=None, name="out.csv"):
    out = tmp_path / name
    code = main(list(args) + ["--out", str(out)], env=env or {})
    return code, out


def _read(path):
    meta, body = {}, []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                meta[key] = value
            else:
                body.append(line)
    rows = list(csv.reader(body))
    return meta, rows[0], rows[1:]


def _col(header, rows, name):
    i = header.index(name)
    return np.array([float(r[i]) for r in rows])


# -- fringe and cornu ---------------------------------------------------------------

def test_fringe_default_contains_main_peak(tmp_path):
    code, out = _run(tmp_path, "fringe")
    assert code == EXIT_OK
    meta, header, rows = _read(out)
    assert header == ["theta", "x", "P"]
    assert len(rows) == 801
    theta, P = _col(header, rows, "theta"), _col(header, rows, "P")
    near = np.abs(theta - 1.217) < 0.006
    assert np.any(np.abs(P[near] - 1.370) <= 1e-3)
    assert meta["species"] == "argon"


def test_fringe_row_count_and_precision(tmp_path):
    code, out = _run(tmp_path, "fringe", "--theta-range", "0", "2", "--count", "17")
    assert code == EXIT_OK
    _, _, rows = _read(out)
    assert len(rows) == 17
    digits = max(len(r[2].replace(".", "").replace("-", "").split("e")[0].lstrip("0")) for r in rows)
    assert digits <= 12


def test_fringe_empty_range_is_config_error(tmp_path):
    code, _ = _run(tmp_path, "fringe", "--theta-range", "0", "0")
    assert code == EXIT_CONFIG


def test_cornu_rows(tmp_path):
    code, out = _run(tmp_path, "cornu", "--theta-range", "-2", "2", "--count", "401")
    assert code == EXIT_OK
    _, header, rows = _read(out)
    theta = _col(header, rows, "theta")
    i0 = int(np.argmin(np.abs(theta)))
    assert [float(v) for v in rows[i0][1:]] == [0.0, 0.0, 0.25]
    assert np.all(np.diff(theta) > 0)
    # the largest P matches the fringe command on the same grid
    code, fout = _run(tmp_path, "fringe", "--theta-range", "-2", "2", "--count", "401", name="f.csv")
    _, fh, frows = _read(fout)
    assert _col(header, rows, "P").max() == _col(fh, frows, "P").max()


# -- ensembles ----------------------------------------------------------------------

def test_visibility_ordering_and_flags(tmp_path):
    code, out = _run(tmp_path, "visibility", "--temp-range", "1e-8", "1e-7", "--count", "3", "--t", "2e-5")
    assert code == EXIT_OK
    meta, header, rows = _read(out)
    assert len(rows) == 3
    vm1, v0 = _col(header, rows, "V_Rm1"), _col(header, rows, "V_R0")
    assert np.all(vm1 >= v0)
    assert np.all(np.diff(v0) < 0)
    for name in ("suppressed_Rm1", "suppressed_R0", "suppressed_R1"):
        assert {r[header.index(name)] for r in rows} <= {"true", "false"}


def test_visibility_delta_is_constant(tmp_path):
    code, out = _run(tmp_path, "visibility", "--distribution", "delta", "--count", "3")
    assert code == EXIT_OK
    _, header, rows = _read(out)
    assert np.allclose(_col(header, rows, "V_R0"), 0.2756055, atol=1e-6)


def test_purity_column(tmp_path):
    code, out = _run(tmp_path, "purity", "--count", "6", "--temp", "1e-6,1e-5")
    assert code == EXIT_OK
    meta, header, rows = _read(out)
    assert meta["partial"] == "false"
    for name in header[1:]:
        col = _col(header, rows, name)
        assert np.all((col > 0) & (col <= 1 + 1e-9))
        assert col[0] >= 0.99
        assert np.all(np.diff(col) <= 0)


def test_overlap_bounded(tmp_path):
    code, out = _run(tmp_path, "overlap", "--count", "5")
    assert code == EXIT_OK
    _, header, rows = _read(out)
    assert header == ["S_over_hbar", "O_m1_1", "O_0_m1", "O_0_1"]
    vals = np.array([[float(v) for v in r[1:]] for r in rows])
    assert np.all((vals > 0) & (vals <= 1.0))
    assert np.all(np.abs(vals[-1] - 1) <= 1e-2)


# -- pulses -------------------------------------------------------------------------

def test_pulse_markers(tmp_path):
    code, out = _run(tmp_path, "pulse", "--window", "periodic_hanning", "--t", "1.2e-3", "--count", "300")
    assert code == EXIT_OK
    meta, header, rows = _read(out)
    marks = [float(rows[0][header.index(k)]) for k in ("x_p_minus", "x_p0", "x_p_plus")]
    assert marks[0] < marks[1] < marks[2]
    assert marks[1] == pytest.approx(0.1 * 1.2e-3, rel=1e-12)
    assert meta["normalised"] == "false"


def test_pulse_boundary_profile(tmp_path):
    code, out = _run(tmp_path, "pulse", "--window", "blackman", "--profile", "t", "--x", "0", "--count", "200")
    assert code == EXIT_OK
    _, header, rows = _read(out)
    d, chi2 = _col(header, rows, "density"), _col(header, rows, "window_squared")
    assert np.max(np.abs(d - chi2)) <= 1e-10


def test_pulse_normalised_profile(tmp_path):
    code, out = _run(tmp_path, "pulse", "--window", "hanning", "--count", "2000")
    assert code == EXIT_OK
    meta, header, rows = _read(out)
    x, d = _col(header, rows, "x"), _col(header, rows, "density")
    assert meta["normalised"] == "true"
    assert np.trapezoid(d, x) == pytest.approx(1.0, abs=1e-3)


def test_uncertainty_columns(tmp_path):
    code, out = _run(tmp_path, "uncertainty", "--count", "12")
    assert code == EXIT_OK
    meta, header, rows = _read(out)
    assert {r[header.index("rect_sigma_divergent")] for r in rows} == {"true"}
    for name in ("sine_fwhm_tau_over_hbar", "rect_fwhm_tau_over_hbar"):
        assert np.all(np.diff(_col(header, rows, name)) >= 0)
    assert np.all(np.isfinite(_col(header, rows, "sine_sigma_tau_over_hbar")))
    top = float(meta["crossover_time"])
    assert top == pytest.approx(0.99888e-6, rel=1e-4)
    assert _col(header, rows, "tau")[0] == pytest.approx(0.01 * top, rel=1e-11)


# -- validation ---------------------------------------------------------------------

def test_validate_subset(capsys):
    assert main(["validate", "--only", "w"], env={}) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 1 and lines[0].startswith("PASS w")


def test_validate_bad_tolerance():
    assert main(["validate", "--tol", "0"], env={}) == EXIT_CONFIG


def test_validate_unknown_check():
    assert main(["validate", "--only", "nope"], env={}) == EXIT_CONFIG


def test_validate_failure_is_numerical(capsys):
    assert main(["validate", "--only", "parseval", "--tol", "1e-15"], env={}) == EXIT_NUMERICAL
    assert "FAIL parseval" in capsys.readouterr().out


# -- configuration ------------------------------------------------------------------

def test_config_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# local defaults\np0-over-m = 0.2\ntau = 5e-6\nspecies = sodium\n")
    env = {"MWPULSE_CONFIG": str(cfg)}
    code, out = _run(tmp_path, "fringe", "--count", "3", "--tau", "7e-6", env=env)
    assert code == EXIT_OK
    meta, _, _ = _read(out)
    assert float(meta["p0_over_m"]) == 0.2       # from the file
    assert float(meta["tau"]) == 7e-6            # flag wins
    assert meta["species"] == "sodium"
    assert float(meta["t"]) == 200e-6            # built-in default


def test_config_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("no equals sign here\n")
    assert main(["fringe"], env={"MWPULSE_CONFIG": str(bad)}) == EXIT_CONFIG
    assert main(["fringe"], env={"MWPULSE_CONFIG": str(tmp_path / "missing.cfg")}) == EXIT_CONFIG
    assert main(["fringe", "--species", "unobtainium"], env={}) == EXIT_CONFIG
    assert main(["fringe", "--tau", "-1"], env={}) == EXIT_CONFIG
    assert main(["pulse", "--window", "triangle"], env={}) == EXIT_CONFIG
    assert main(["fringe", "--units", "imperial"], env={}) == EXIT_CONFIG
    assert main(["fringe", "--out", str(tmp_path / "nodir" / "x.csv")], env={}) == EXIT_CONFIG


def test_natural_units(tmp_path):
    code, out = _run(tmp_path, "fringe", "--units", "natural", "--p0-over-m", "1", "--t", "1",
                     "--theta-range", "0", "0.5", "--count", "2")
    assert code == EXIT_OK
    _, header, rows = _read(out)
    x = _col(header, rows, "x")
    assert x[1] == pytest.approx(1 - math.sqrt(math.pi) * 0.5, rel=1e-11)


def test_deterministic_output(tmp_path):
    args = ("overlap", "--count", "4", "--threads", "1")
    _, a = _run(tmp_path, *args, name="a.csv")
    _, b = _run(tmp_path, *args, name="b.csv")
    assert a.read_bytes() == b.read_bytes()
    _, c = _run(tmp_path, "overlap", "--count", "4", "--threads", "3", name="c.csv")
    assert _read(a)[2] == _read(c)[2]
