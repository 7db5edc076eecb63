import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import fourier_integral_quad, gram_mp
from sampdual.exponential import (
    SMALL_OMEGA,
    SpectralError,
    TestFunction,
    bessel_bound_estimate,
    fourier_integral,
    frame_bounds_exact,
    frame_bounds_grid,
    frame_lower_probe,
    gram_matrix,
    riesz_bound_estimates,
)
from sampdual.quadrature import GridError, min_resolution
from sampdual.sets import UDSet
from sampdual.spectra import Spectrum

PI = math.pi
SHANNON = Spectrum.symmetric(PI)


def lattice(alpha, t):
    return UDSet.lattice(alpha).truncate(-t, t).as_array()


# kernel integral


@pytest.mark.parametrize("omega,expected", [(1.0, 0.0), (0.0, 2 * PI), (0.5, 4.0)])
def test_fourier_integral_closed_forms(omega, expected):
    assert fourier_integral(SHANNON, omega) == pytest.approx(expected, abs=1e-14)


@pytest.mark.parametrize("omega", [-7.3, 0.01, 0.77, 13.0])
def test_fourier_integral_matches_quadrature(omega):
    ivs = [(-2.0, -0.3), (1.0, 3.5)]
    got = fourier_integral(Spectrum(tuple(ivs)), omega)
    assert abs(got - fourier_integral_quad(ivs, omega)) < 1e-13


def test_branches_agree_at_threshold():
    s = Spectrum.parse("-pi:-1,2:pi")
    w0 = SMALL_OMEGA / s.sigma
    below, above = fourier_integral(s, np.array([w0 * (1 - 1e-6), w0 * (1 + 1e-6)]))
    ivs = list(s.intervals)
    assert abs(below - fourier_integral_quad(ivs, w0 * (1 - 1e-6))) < 1e-13
    assert abs(above - fourier_integral_quad(ivs, w0 * (1 + 1e-6))) < 1e-13


# Gram matrices


def test_gram_identity_on_integers():
    for pts in (np.arange(-3.0, 4.0), lattice(2, 10)):
        g = gram_matrix(pts, SHANNON).entries
        assert np.max(np.abs(g - np.eye(len(pts)))) < 1e-14


def test_gram_half_step_entry():
    g = gram_matrix([0.0, 0.5], SHANNON).entries
    assert g[0, 1] == pytest.approx(2 / PI, abs=1e-15)
    assert g[1, 0] == pytest.approx(2 / PI, abs=1e-15)


def test_gram_matches_extended_precision():
    s = [(0.0, PI), (2 * PI, 3 * PI)]
    pts = np.array([-4.1, -2.0, -0.01, 0.0, 0.7, 3.3, 9.9])
    np.testing.assert_allclose(gram_matrix(pts, Spectrum(tuple(s))).entries, gram_mp(pts, s), atol=2e-15)


def test_gram_rejects_duplicates():
    with pytest.raises(SpectralError, match="duplicate"):
        gram_matrix([0.0, 1.0, 1.0], SHANNON)


def test_gram_csv_layout():
    text = gram_matrix([0.0, 0.5], SHANNON).to_csv().splitlines()
    assert text[0] == "re_0,im_0,re_1,im_1"
    assert len(text) == 3


@given(st.lists(st.integers(-400, 400), min_size=1, max_size=25, unique=True), st.sampled_from(["-pi:pi", "0:pi,2pi:3pi", "-1:2.5"]))
def test_gram_hermitian_psd_with_constant_diagonal(ticks, spec):
    s = Spectrum.parse(spec)
    g = gram_matrix(np.sort(np.array(ticks) * 0.05), s).entries
    assert np.max(np.abs(g - g.conj().T)) == 0.0
    np.testing.assert_allclose(np.diag(g).real, s.measure / (2 * PI), rtol=1e-15)
    ev = np.linalg.eigvalsh(g)
    assert ev[0] >= -1e-12 * ev[-1]


@given(st.lists(st.integers(-100, 100), min_size=2, max_size=20, unique=True))
def test_integer_frequencies_are_orthonormal(ks):
    g = gram_matrix(np.sort(np.array(ks, dtype=float)), SHANNON).entries
    assert np.max(np.abs(g - np.eye(len(ks)))) < 1e-14


def test_scaling_covariance():
    pts = np.array([-2.3, -0.4, 0.0, 1.1, 3.7])
    a = gram_matrix(pts, SHANNON).entries
    b = gram_matrix(pts / 2, SHANNON.scaled(2)).entries
    # the normalization 1/2pi does not scale with S, hence the factor 2
    np.testing.assert_allclose(b, 2 * a, atol=1e-13)


# Riesz and Bessel bounds


def test_shannon_riesz_and_bessel():
    pts = lattice(1, 20)
    r = riesz_bound_estimates(pts, SHANNON)
    assert abs(r.lower - 1) < 1e-12 and abs(r.upper - 1) < 1e-12
    assert abs(bessel_bound_estimate(pts, SHANNON).upper - 1) < 1e-12
    assert abs(bessel_bound_estimate(lattice(2, 20), SHANNON).upper - 1) < 1e-12


def test_oversampled_lattice_is_not_riesz():
    assert riesz_bound_estimates(lattice(0.5, 20), SHANNON).lower < 0.05


def test_undersampled_lattice_riesz_lower():
    # symbol of the Gram operator takes the values 1/alpha and 2/alpha
    r = riesz_bound_estimates(lattice(1.25, 50), SHANNON)
    assert r.lower > 0.1
    assert r.lower == pytest.approx(0.8, abs=1e-9)
    assert r.upper == pytest.approx(1.6, abs=1e-9)


def test_near_duplicate_rows_double_the_bessel_bound():
    pts = np.sort(np.concatenate((np.arange(-20.0, 21.0), np.arange(-20.0, 20.0) + 0.01)))
    val = bessel_bound_estimate(pts, SHANNON).upper
    oracle = np.linalg.eigvalsh(gram_mp(pts, [(-PI, PI)]))[-1]
    assert abs(val - oracle) < 1e-13
    # the true value is 2 minus a gap far below double precision
    assert 1.9 < val <= 2 + 1e-12


@pytest.mark.parametrize("spec", ["-pi:pi", "0:pi,2pi:3pi", "-2:0.5"])
def test_window_monotonicity(spec):
    s = Spectrum.parse(spec)
    lam = UDSet.periodic_set(2, [0.0, 0.7, 1.3])
    prev = None
    for t in (5, 10, 20, 40):
        r = riesz_bound_estimates(lam.truncate(-t, t), s)
        if prev is not None:
            assert r.lower <= prev.lower + 1e-12
            assert r.upper >= prev.upper - 1e-12
        prev = r


def test_bounds_record_fields():
    d = riesz_bound_estimates(UDSet.lattice(1).truncate(-3, 3), SHANNON).to_dict()
    assert d["kind"] == "riesz" and d["window"] == [-3.0, 3.0] and d["grid"] is None


# frame bounds


@pytest.mark.parametrize("t", [20, 40])
def test_shannon_frame_bounds(t):
    pts = lattice(1, t)
    b = frame_bounds_grid(pts, SHANNON, math.ceil(min_resolution(pts)))
    assert 1 - 5 / t <= b.lower <= b.upper <= 1 + 5 / t
    assert abs(b.lower - 1) < 1e-6 and abs(b.upper - 1) < 1e-6


def test_frame_grid_converges_under_refinement():
    pts = lattice(1, 20)
    a, b = frame_bounds_grid(pts, SHANNON, 16), frame_bounds_grid(pts, SHANNON, 32)
    assert abs(a.lower - b.lower) < 1e-6 and abs(a.upper - b.upper) < 1e-6


def test_oversampled_frame_upper_is_two():
    pts = lattice(0.5, 40)
    b = frame_bounds_grid(pts, SHANNON, math.ceil(min_resolution(pts)))
    assert b.upper == pytest.approx(2.0, abs=1e-6)
    assert b.lower > 1.5


def test_grid_and_exact_frame_bounds_agree():
    for alpha, t in ((0.5, 20), (0.8, 20), (3.0, 30)):
        pts = lattice(alpha, t)
        g = frame_bounds_grid(pts, SHANNON, 2 * math.ceil(min_resolution(pts)))
        e = frame_bounds_exact(pts, SHANNON)
        assert abs(g.lower - e.lower) < 1e-9 and abs(g.upper - e.upper) < 1e-9


def test_undersampled_frame_lower_vanishes():
    pts = lattice(3, 30)
    assert frame_bounds_grid(pts, SHANNON, 32).lower == 0.0


def test_empty_system_frame_bounds():
    b = frame_bounds_grid(UDSet.from_points([], window=(-5, 5)), SHANNON, 8)
    assert (b.lower, b.upper) == (0.0, 0.0)


def test_frame_grid_too_coarse():
    with pytest.raises(GridError):
        frame_bounds_grid(lattice(1, 20), SHANNON, 4)


def test_edge_caveat_for_small_spectrum():
    pts = lattice(1, 40)
    b = frame_bounds_grid(pts, Spectrum.parse("-pi/2:pi/2"), 32)
    # true lower bound is 1; the finite window pulls the estimate down
    assert b.lower < 1 and b.edge_caveat
    assert b.to_dict()["edge_mass"] > 0.1


# test functions and probes


def test_test_function_norm_and_values():
    s = Spectrum.parse("-pi:-1,0.5:pi")
    f = TestFunction.random(s, 6, np.random.default_rng(2))
    # Parseval on the grid: sum over Gauss nodes of |F|^2 equals the exact norm
    from sampdual.quadrature import make_grid

    g = make_grid(s, 40, breakpoints=f.breakpoints)
    assert f.norm_sq() == pytest.approx(float(np.sum(g.weights * np.abs(f.spectral_values(g.nodes)) ** 2)), rel=1e-13)
    x = np.array([-3.0, 0.0, 1e-9, 2.5])
    direct = np.array([np.sum(g.weights * np.exp(-1j * xi * g.nodes) * f.spectral_values(g.nodes)) for xi in x])
    np.testing.assert_allclose(f(x), direct / math.sqrt(2 * PI), atol=1e-13)


def test_constant_probe_on_integers():
    assert frame_lower_probe(lattice(1, 40), SHANNON, [TestFunction.constant(SHANNON)]) == pytest.approx(1, abs=1e-2)


def test_probe_vanishing_on_the_set():
    # F = 1 on [-pi, pi] gives f(n) = 0 for every integer n != 0
    assert frame_lower_probe(np.array([-2.0, -1.0, 1.0, 2.0]), SHANNON, [TestFunction.constant(SHANNON)]) < 1e-30


def test_random_probes_certify_undersampling():
    rng = np.random.default_rng(0)
    probes = [TestFunction.random(SHANNON, 8, rng) for _ in range(20)]
    assert frame_lower_probe(lattice(3, 60), SHANNON, probes) < 0.9


def test_zero_probe_rejected():
    with pytest.raises(SpectralError, match="zero norm"):
        frame_lower_probe([0.0], SHANNON, [TestFunction.constant(SHANNON, 0.0)])
