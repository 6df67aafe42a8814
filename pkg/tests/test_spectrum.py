import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from necklace_waves import bands, spectrum
from necklace_waves.errors import BandEdgeError, InvalidSpecError, NoRootError
from necklace_waves.spectrum import Schedule, SpectralParams

PI = math.pi
HOM = SpectralParams(0.1625, 0.5, 2 * PI, 0.0)


def test_params_validation():
    with pytest.raises(InvalidSpecError):
        SpectralParams(0.1, 0.0)
    with pytest.raises(InvalidSpecError):
        SpectralParams(0.1, 0.5, 7.0, 1.0)
    assert HOM.replace(L1=PI).L2 == pytest.approx(PI)


def test_closed_form_roots_are_zeros():
    for r in spectrum.roots_homogeneous(0.1625, 0.5):
        assert abs(spectrum.char_residual(r.lam, HOM)) <= 1e-10 * spectrum.residual_scale(r.lam, HOM)


def test_band_points_are_zeros():
    c = 0.4
    for ell, br in [(0.2, 1), (0.33, 2), (-0.1, 3)]:
        w = bands.band_frequency(ell, br, PI, PI)
        p = SpectralParams(c * ell - w, c, PI, PI)
        assert abs(spectrum.char_residual(1j * ell, p)) <= 1e-10


@given(re=st.floats(-2, 2), im=st.floats(-4, 4), sigma=st.floats(-1, 1),
       c=st.floats(0.1, 2), L1=st.floats(0.5, 2 * PI))
@settings(max_examples=60, deadline=None)
def test_reflection_symmetry(re, im, sigma, c, L1):
    p = SpectralParams(sigma, c, L1, 2 * PI - L1)
    lam = complex(re, im)
    a = complex(spectrum.char_residual(-lam.conjugate(), p))
    b = complex(spectrum.char_residual(lam, p)).conjugate()
    assert abs(a - b) <= 1e-12 * spectrum.residual_scale(lam, p)


def test_derivative_matches_difference_quotient():
    p = SpectralParams(0.1, 0.5, PI, PI)
    for lam in (0.3 + 0.2j, -0.1 + 1.7j, 0.02 - 0.8j):
        h = 1e-6
        fd = (spectrum.char_residual(lam + h, p) - spectrum.char_residual(lam - h, p)) / (2 * h)
        assert abs(spectrum.char_derivative(lam, p) - fd) <= 1e-5 * max(1.0, abs(fd))


def test_homogeneous_roots_examples():
    sig = 0.0625 + 0.1
    k0 = spectrum.roots_homogeneous(sig, 0.5, [0])
    assert sorted(r.lam.real for r in k0) == pytest.approx([-math.sqrt(0.1), math.sqrt(0.1)])
    assert all(r.lam.imag == pytest.approx(0.25) for r in k0)
    km1 = spectrum.roots_homogeneous(sig, 0.5, [-1])
    assert all(abs(r.lam.real) == 0 for r in km1)
    assert sorted(r.lam.imag for r in km1) == pytest.approx([0.61754, 1.88246], abs=1e-5)
    dbl = spectrum.roots_homogeneous(0.0625, 0.5, [0])
    assert dbl[0].lam == pytest.approx(0.25j) and dbl[1].lam == pytest.approx(0.25j)


def test_flat_roots():
    p = SpectralParams(0.2, 0.5, PI, PI)
    fr = spectrum.flat_roots(p, 3)
    for m, r in enumerate(fr, 1):
        assert r.lam == pytest.approx(1j * (0.2 + m * m) / 0.5)
        assert r.family == "flat" and r.residual <= 1e-14
    assert spectrum.flat_roots(HOM) == []


def test_newton_from_perturbed_closed_form():
    p = SpectralParams(0.1625, 0.5, 2 * PI - 1e-6, 1e-6)
    for r in spectrum.roots_homogeneous(0.1625, 0.5, range(-3, 4)):
        assert spectrum.newton_iterations(r.lam, p) <= 3


def test_newton_failure_reports_last_iterate():
    with pytest.raises(NoRootError) as info:
        spectrum.newton_root(60.0 + 0j, HOM, maxit=20)
    assert info.value.last is not None
    assert info.value.iterations == 20


def test_classification():
    k0 = spectrum.roots_homogeneous(0.1625, 0.5, [0])
    assert sorted(r.cls for r in k0) == ["stable", "unstable"]
    assert all(r.cls == "center" for r in spectrum.roots_homogeneous(0.1625, 0.5, [-1]))
    assert spectrum.classify(1e-12 + 1j) == "center"
    parts = spectrum.classify_roots(spectrum.roots_homogeneous(0.1625, 0.5))
    assert sum(parts["counts"].values()) == 26
    for r in parts["center"]:
        assert abs(r.lam.real) <= spectrum.CLASS_TOL


def test_grid_scan_recovers_closed_forms():
    ref = [r.lam for r in spectrum.roots_homogeneous(0.1625, 0.5, range(-8, 9))
           if abs(r.lam.real) <= 1 and abs(r.lam.imag) <= 3]
    found = [r.lam for r in spectrum.grid_scan((-1, 1, -3, 3), (201, 601), HOM)]
    assert len(found) == len(ref)
    for z in ref:
        assert min(abs(z - f) for f in found) <= 1e-8


def test_grid_scan_empty_region():
    assert spectrum.grid_scan((3, 4, 0.1, 0.2), (20, 20), HOM) == []


def test_short_continuation_tracks_roots():
    seeds = spectrum.roots_homogeneous(0.1625, 0.5, range(-2, 3))
    paths, _ = spectrum.continue_path(seeds, Schedule("L1", 2 * PI, 2 * PI - 0.3), HOM,
                                      n_steps=200)
    p_end = HOM.replace(L1=2 * PI - 0.3)
    for path in paths:
        z = np.array(path.values)
        assert np.abs(np.diff(z)).max() <= 0.05
        assert path.params[-1] == pytest.approx(2 * PI - 0.3)
        assert abs(spectrum.char_residual(path.final, p_end)) <= 1e-9


def test_schedule_validation():
    with pytest.raises(InvalidSpecError):
        Schedule("c", 0, 1)
    with pytest.raises(InvalidSpecError):
        Schedule("sigma", 0.1, 0.1)


def test_homogeneous_bifurcation(bif_hom):
    assert bif_hom.ell0 == pytest.approx(0.25, abs=1e-12)
    assert bif_hom.sigma0 == pytest.approx(0.0625, abs=1e-12)
    assert bif_hom.c0 == pytest.approx(0.5, abs=1e-12)
    assert bif_hom.omega_pp == pytest.approx(2.0, abs=1e-10)
    assert bif_hom.kappa == pytest.approx(1.0, abs=1e-10)
    assert spectrum.has_homoclinic(bif_hom)


def test_necklace_bifurcation(bif):
    assert bif.ell0 == pytest.approx(0.3437067837, abs=1e-6)
    assert bif.sigma0 == pytest.approx(0.0742138336, abs=1e-6)
    assert bif.omega_pp == pytest.approx(0.2229344892, abs=1e-6)
    w = bands.band_frequency(bif.ell0, 1, PI, PI)
    w1, w2 = bands.band_derivatives(bif.ell0, w, PI, PI)
    assert bif.sigma0 == pytest.approx(-w + bif.ell0 * w1, abs=1e-10)
    assert bif.c0 == pytest.approx(w1, abs=1e-10)
    assert bif.kappa ** 2 * bif.omega_pp == pytest.approx(2.0, abs=1e-12)


def test_bifurcation_is_double_root(bif):
    p = SpectralParams(bif.sigma0, bif.c0, PI, PI)
    lam = 1j * bif.ell0
    assert abs(spectrum.char_residual(lam, p)) <= 1e-10
    assert abs(spectrum.char_derivative(lam, p)) <= 1e-8


def test_bifurcation_from_root_recovers_band_point(bif):
    p = SpectralParams(bif.sigma0 + 1e-3, bif.c0, PI, PI)
    b2 = spectrum.bifurcation_from_root(1j * bif.ell0 + 0.01, p)
    assert b2.ell0 == pytest.approx(bif.ell0, abs=1e-10)
    assert b2.sigma0 == pytest.approx(bif.sigma0, abs=1e-10)


def test_degenerate_curvature_rejected(bif):
    from dataclasses import replace
    with pytest.raises(BandEdgeError):
        spectrum.has_homoclinic(replace(bif, omega_pp=0.0))


def test_splitting_direction(bif):
    # above sigma0 the pair leaves the axis (hyperbolic), below it stays on it
    up = spectrum.split_roots(bif, 1e-5)
    assert all(r.cls != "center" for r in up)
    down = spectrum.split_roots(bif, -1e-5)
    assert all(r.cls == "center" for r in down)


def test_splitting_square_root_law_small_delta(bif):
    # the square-root law is clean well inside the asymptotic regime
    d = [abs(spectrum.split_roots(bif, s)[0].lam - 1j * bif.ell0) for s in (1e-6, 4e-6)]
    assert d[1] / d[0] == pytest.approx(2.0, rel=0.05)
