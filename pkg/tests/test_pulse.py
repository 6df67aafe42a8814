import math
from dataclasses import replace

import numpy as np
import pytest

from necklace_waves.errors import (
    InsufficientCellsError,
    InvalidSpecError,
    NoHomoclinicError,
    NoSolitonError,
)
from necklace_waves.graph import MetricGraphSpec, build_ladder, build_necklace
from necklace_waves.pulse import (
    build_initial_data,
    cell_counts,
    homogeneous_soliton,
    ladder_soliton,
    reversibility_check,
    sech_envelope,
)

PI = math.pi


def test_envelope_homogeneous_constants():
    A = sech_envelope(2.0, 1.0)
    X = np.linspace(-5, 5, 11)
    assert np.allclose(A(X), 1 / np.cosh(X), atol=1e-15)


def test_envelope_solves_normal_form(bif):
    A = sech_envelope(bif.omega_pp, bif.gamma)
    assert A.kappa == pytest.approx(2.9952, abs=1e-4)
    X = np.linspace(-4, 4, 200)
    assert np.abs(A.residual(X)).max() <= 1e-12


def test_envelope_rejects_negative_curvature():
    with pytest.raises(NoHomoclinicError):
        sech_envelope(-0.1, 1.0)
    with pytest.raises(NoHomoclinicError):
        sech_envelope(0.0, 1.0)


def test_cell_budget_examples():
    b = cell_counts(0.01, 2.9952, 0.5, 100)
    assert b.n0 == 172
    assert b.n1 == 8
    assert b.satisfied_by(175, 0.01, 2.9952)
    assert not b.satisfied_by(171, 0.01, 2.9952)


def test_cell_budget_monotone_in_eps():
    n = [cell_counts(e, 3.0, 0.5, 10).n0 for e in (0.005, 0.01, 0.02, 0.04)]
    assert all(a > b for a, b in zip(n, n[1:]))


def test_cell_budget_invalid():
    with pytest.raises(InvalidSpecError):
        cell_counts(0.0, 3.0, 0.5, 10)


def _hom_grid(eps, pts=31):
    b = cell_counts(eps, 1.0, 0.5, 10)
    return build_necklace(MetricGraphSpec("necklace", 2 * PI, 0.0, n_cells=2 * b.n0 + 1,
                                          pts_per_edge=pts, boundary="dirichlet_ends")), b.n0


def test_homogeneous_initial_data(bif_hom):
    eps = 0.05
    g, n0 = _hom_grid(eps)
    psi = build_initial_data(g, bif_hom, eps, n0).values
    xc = g.symmetry_point(n0)
    ref = eps / np.cosh(eps * (g.x - xc)) * np.exp(0.25j * (g.x - xc))
    # f is a constant of modulus one; its phase is fixed to be real-positive
    assert np.abs(psi - ref).max() <= 1e-12
    assert np.abs(psi).max() == pytest.approx(eps, abs=1e-10)


def test_necklace_peak_bounds(bif):
    eps = 0.05
    b = cell_counts(eps, bif.kappa, bif.c0, 10)
    g = build_necklace(MetricGraphSpec(n_cells=2 * b.n0 + 1, pts_per_edge=30))
    peak = np.abs(build_initial_data(g, bif, eps, b.n0).values).max()
    top = eps / math.sqrt(bif.gamma)
    # sup |f| = 1 is reached mid-semicircle, half a cell from the envelope centre
    assert top * (1 / math.cosh(eps * bif.kappa * PI)) - 1e-12 <= peak <= top + 1e-12


def test_normalisation_invariance(bif):
    eps = 0.05
    b = cell_counts(eps, bif.kappa, bif.c0, 10)
    g = build_necklace(MetricGraphSpec(n_cells=2 * b.n0 + 1, pts_per_edge=20))
    base = build_initial_data(g, bif, eps, b.n0).values
    alpha = 1.7 * np.exp(0.4j)
    mode = replace(bif.mode, scale=bif.mode.scale * alpha)
    other = build_initial_data(g, bif, eps, b.n0, mode=mode,
                               gamma=bif.gamma * abs(alpha) ** 2).values
    theta = np.angle(np.vdot(base, other))
    assert np.abs(other - np.exp(1j * theta) * base).max() <= 1e-10


def test_insufficient_cells(bif):
    g = build_necklace(MetricGraphSpec(n_cells=20))
    with pytest.raises(InsufficientCellsError):
        build_initial_data(g, bif, 0.05)


def test_pulse_needs_necklace(bif):
    with pytest.raises(InvalidSpecError):
        build_initial_data(build_ladder(MetricGraphSpec("ladder", n_cells=4)), bif, 0.1)


def test_reversibility_of_fresh_data(bif):
    eps = 0.05
    b = cell_counts(eps, bif.kappa, bif.c0, 10)
    g = build_necklace(MetricGraphSpec(n_cells=2 * b.n0 + 1, pts_per_edge=31))
    psi = build_initial_data(g, bif, eps, b.n0)
    x0 = g.symmetry_point(b.n0)
    assert reversibility_check(psi, g, x0).passed
    # shifting the envelope by half a cell breaks the symmetry about x0
    shifted = build_initial_data(g, bif, eps, b.n0, check_tail=False)
    moved = np.interp(g.x - PI, g.x, np.abs(shifted.values)) * np.exp(1j * bif.ell0 * (g.x - x0))
    assert not reversibility_check(moved, g, x0).passed


def test_reversibility_of_exact_soliton():
    sol = homogeneous_soliton(0.3, 0.5)
    g = build_necklace(MetricGraphSpec("necklace", 2 * PI, 0.0, n_cells=8, pts_per_edge=31))
    x0 = g.symmetry_point(4)
    assert reversibility_check(sol.field(g.x, 0.0, x0), g, x0).passed


def test_homogeneous_soliton_examples():
    s = homogeneous_soliton(1.0, 0.0)
    xi = np.linspace(-3, 3, 13)
    assert np.allclose(s(xi), 1 / np.cosh(xi), atol=1e-15)
    assert homogeneous_soliton(0.1625, 0.5).amplitude == pytest.approx(math.sqrt(0.1))
    with pytest.raises(NoSolitonError):
        homogeneous_soliton(0.0625, 0.5)


def test_homogeneous_soliton_residual():
    s = homogeneous_soliton(0.4, 0.7)
    assert np.abs(s.residual(np.linspace(-10, 10, 101))).max() <= 1e-13


def test_ladder_soliton_examples():
    g = build_ladder(MetricGraphSpec("ladder", n_cells=40, pts_per_edge=11))
    psi = ladder_soliton(0.3, 0.5, g).values
    assert np.abs(psi).max() == pytest.approx(math.sqrt(0.2375), abs=1e-12)
    # each rung carries the value of its two end vertices
    for e in g.edges:
        if e.kind == "rung":
            vals = psi[e.nodes]
            assert np.abs(vals - vals[0]).max() <= 1e-12


def test_ladder_standing_wave_same_on_rails():
    g = build_ladder(MetricGraphSpec("ladder", n_cells=20, pts_per_edge=7))
    psi = ladder_soliton(1.0, 0.0, g, x_center=10.0).values
    top = np.sort(np.abs(psi[g.side == 1]))
    bot = np.sort(np.abs(psi[g.side == -1]))
    assert np.allclose(top, bot, atol=1e-15)
    assert np.allclose(psi.imag, 0.0, atol=1e-15)


def test_ladder_soliton_needs_ladder():
    with pytest.raises(InvalidSpecError):
        ladder_soliton(0.3, 0.5, build_necklace(MetricGraphSpec()))
