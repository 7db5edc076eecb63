import math

import numpy as np
import pytest

from sampdual.exponential import TestFunction, frame_bounds_grid
from sampdual.quadrature import GridError
from sampdual.sets import Perturbation, SetError, UDSet
from sampdual.spectra import Spectrum
from sampdual.stability import (
    perturbation_norm_check,
    perturbation_norm_exact,
    restriction_matrix,
    split_bessel_constants,
    stability_margin_experiment,
)

HALF = Spectrum.symmetric(math.pi / 2)


def integers(t):
    return UDSet.lattice(1).truncate(-t, t)


def alternating(lam, delta):
    return Perturbation.from_rule(lam, lambda x: delta if round(x) % 2 == 0 else -delta, delta)


def test_restriction_singular_values_near_one():
    sv = restriction_matrix(integers(20).as_array(), Spectrum.symmetric(math.pi), 32).singular_values()
    assert np.all(np.abs(sv - 1) <= 5 / 20)


def test_empty_restriction():
    r = restriction_matrix(np.zeros(0), HALF, 16)
    assert r.shape[0] == 0 and r.norm() == 0.0


def test_single_row_samples_constant():
    s = Spectrum.interval(-1.0, 2.0)
    f = TestFunction.from_values(s, [[-1.0, 2.0]], [[1.0, 1.0]])
    value = restriction_matrix(np.array([0.0]), s, 64).apply(f)
    assert value[0] == pytest.approx(3.0 / math.sqrt(2 * math.pi), rel=1e-12)


def test_zero_perturbation():
    lam = integers(10)
    rep = perturbation_norm_check(lam, Perturbation.from_rule(lam, lambda x: 0.0, 0.0), HALF, 32)
    assert rep.measured_norm == 0.0 and rep.bound == 0.0 and rep.passes


def test_alternating_shift_within_bound():
    lam = integers(20)
    rep = perturbation_norm_check(lam, alternating(lam, 0.1), HALF, 32)
    c1, c2 = split_bessel_constants(lam.as_array() + alternating(lam, 0.1).shift_array(lam.points) / 2, HALF)
    assert rep.bound == pytest.approx(0.1 * (math.pi / 2) * math.sqrt(c1 + c2), rel=1e-14)
    assert 0 < rep.measured_norm <= rep.bound
    assert rep.passes


def test_random_perturbations_pass_over_seeds():
    lam = integers(20)
    for seed in range(100):
        assert perturbation_norm_check(lam, Perturbation.random(lam, 0.05, seed), HALF, 32).passes


def test_grid_norm_matches_closed_form():
    lam = integers(15)
    for seed in range(5):
        pert = Perturbation.random(lam, 0.1, seed)
        grid = perturbation_norm_check(lam, pert, HALF, 32).measured_norm
        assert grid == pytest.approx(perturbation_norm_exact(lam, pert, HALF), rel=1e-8)


def test_norm_is_linear_in_delta():
    lam = integers(40)
    small = perturbation_norm_check(lam, alternating(lam, 0.05), HALF, 32).measured_norm
    big = perturbation_norm_check(lam, alternating(lam, 0.1), HALF, 32).measured_norm
    assert small <= 0.6 * big
    assert small / big == pytest.approx(0.5, abs=0.02)


def test_regime_enforced():
    lam = integers(5)
    with pytest.raises(SetError, match="d/4"):
        perturbation_norm_check(lam, Perturbation.random(lam, 0.25, 0), HALF, 32)
    with pytest.raises(SetError):
        perturbation_norm_check(UDSet.lattice(1), Perturbation(0.0, {}), HALF, 32)


def test_coarse_grid_propagates():
    with pytest.raises(GridError):
        stability_margin_experiment(integers(30), HALF, [0.0], 1, 4)


def test_margin_baseline_matches_grid_frame_bound():
    lam = integers(40)
    t = stability_margin_experiment(lam, HALF, [0.0], [0], 40)
    ref = frame_bounds_grid(lam.as_array(), HALF, 40, window=lam.window).lower
    assert t.baseline_A == ref
    assert t.rows[0].A_est == pytest.approx(ref, rel=1e-12)


def test_half_safe_radius_keeps_quarter_margin():
    lam = integers(40)
    star = stability_margin_experiment(lam, HALF, [0.0], [0], 40).delta_star
    assert 0 < star / 2 < 0.25
    t = stability_margin_experiment(lam, HALF, [star / 2], range(10), 40)
    assert all(r.A_est > t.baseline_A / 4 for r in t.rows)


def test_margin_decays_with_delta():
    deltas = [0.0, 0.05, 0.1, 0.15, 0.2, 0.24]
    t = stability_margin_experiment(integers(30), Spectrum.symmetric(0.95 * math.pi), deltas, range(8), 40)
    means = [t.mean_A()[d] for d in deltas]
    assert all(a > b for a, b in zip(means, means[1:]))
    assert means[-1] < 0.6 * means[0]
    assert t.summary()["all_bounds_hold"]


def test_table_is_deterministic():
    args = (integers(10), HALF, [0.05, 0.1], range(3), 32)
    assert stability_margin_experiment(*args) == stability_margin_experiment(*args)
