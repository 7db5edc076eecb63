import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import chebotarev_samples, exact_rank_roots_of_unity
from sampdual.duality import (
    DiscreteModel,
    DualityViolation,
    OrthoDecomposition,
    character_matrix,
    discrete_duality_verify,
    discrete_interpolation_check,
    discrete_sampling_check,
    exhaustive_duality_scan,
    frame_bounds_subspace,
    iter_coordinate_instances,
    prop4_verify,
    random_instance,
    riesz_bounds_vectors,
)

E1, E2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])


# finite-dimensional bounds


def test_riesz_bounds_examples():
    b = riesz_bounds_vectors([E1, E2])
    assert (b.lower, b.upper) == pytest.approx((1, 1))
    b = riesz_bounds_vectors([E1, E1])
    assert b.lower == 0.0 and b.upper == pytest.approx(2)
    b = riesz_bounds_vectors([E1, (E1 + E2) / math.sqrt(2)])
    assert (b.lower, b.upper) == pytest.approx((1 - 1 / math.sqrt(2), 1 + 1 / math.sqrt(2)), abs=1e-15)


def test_frame_bounds_subspace_examples():
    assert frame_bounds_subspace([E1, E2], np.eye(2)).lower == pytest.approx(1)
    p = np.diag([1.0, 0.0])
    assert frame_bounds_subspace([E2], p).lower == 0.0
    b = frame_bounds_subspace([E1, (E1 + E2) / math.sqrt(2)], p)
    assert (b.lower, b.upper) == pytest.approx((1.5, 1.5), abs=1e-15)
    with pytest.raises(ValueError, match="trivial subspace"):
        frame_bounds_subspace([E1], np.zeros((2, 2)))


# decompositions


def test_projector_validation_and_repair():
    p = np.diag([1.0 + 1e-9, -1e-9])
    d = OrthoDecomposition(p, (0,))
    np.testing.assert_allclose(d.projector, np.diag([1.0, 0.0]), atol=1e-15)
    with pytest.raises(ValueError, match="projector"):
        OrthoDecomposition(np.diag([1.0, 0.5]), (0,))


def test_prop4_trivial_examples():
    p = np.diag([1.0, 0.0])
    r = prop4_verify(OrthoDecomposition(p, (0,)))
    assert r.frame_verdict and r.riesz_verdict and r.A == pytest.approx(1) and r.c2 == pytest.approx(1)
    assert r.c2 >= r.A / (1 + r.A)
    r = prop4_verify(OrthoDecomposition(p, (1,)))
    assert not r.frame_verdict and not r.riesz_verdict and r.equivalent


def test_prop4_seeded_four_dimensional():
    rng = np.random.default_rng(2024)
    for _ in range(50):
        q, _ = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
        p = q[:, :2] @ q[:, :2].conj().T
        part = tuple(sorted(rng.choice(4, size=2, replace=False).tolist()))
        r = prop4_verify(OrthoDecomposition(p, part))
        assert r.ok
        # independent rank decision on the frame side
        assert r.frame_verdict == (np.linalg.matrix_rank(p[:, list(part)], tol=1e-8) == 2)


def test_prop4_degenerate_conventions():
    # zero subspace: the empty family is a frame; W empty: vacuously Riesz
    r = prop4_verify(OrthoDecomposition(np.zeros((3, 3)), ()))
    assert r.frame_verdict and r.riesz_verdict and r.A is None
    r = prop4_verify(OrthoDecomposition(np.eye(3), (0, 1, 2)))
    assert r.frame_verdict and r.riesz_verdict and r.c2 is None


def test_mirrored_reports_swap_exactly():
    rng = np.random.default_rng(7)
    for n in range(2, 7):
        for _ in range(20):
            d = random_instance(n, rng)
            a, b = prop4_verify(d), prop4_verify(d.mirrored())
            # both sides of the mirror are built from the same two matrices
            np.testing.assert_allclose(a.frame_singular_values, b.riesz_singular_values, atol=1e-12)
            np.testing.assert_allclose(a.riesz_singular_values, b.frame_singular_values, atol=1e-12)
            if len(d.V) == d.rank:
                # square blocks: frame and Riesz coincide, so the verdicts swap
                assert (a.frame_verdict, a.riesz_verdict) == (b.riesz_verdict, b.frame_verdict)


@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_prop4_random_instances(n, seed):
    r = prop4_verify(random_instance(n, np.random.default_rng(seed)), strict=False)
    assert r.ok, r.to_dict()
    if r.A is not None and r.A > 0.01 and r.c2 is not None:
        assert r.c2 >= r.A / (1 + r.A) - 1e-9


def test_coordinate_enumeration_small():
    for n in range(2, 5):
        assert all(prop4_verify(d).ok for d in iter_coordinate_instances(n))


def test_violation_carries_instance():
    exc = DualityViolation("boom", {"N": 3})
    assert exc.instance == {"N": 3} and '"N": 3' in str(exc)


# discrete model


def test_character_matrix_example():
    e = character_matrix(4, [0, 1], [0, 1])
    np.testing.assert_allclose(e, 0.5 * np.array([[1, 1], [1, 1j]]), atol=1e-15)
    assert np.linalg.det(e) == pytest.approx((1j - 1) / 4)


def test_sampling_examples():
    for n in (3, 6):
        rep = discrete_sampling_check(DiscreteModel(n, tuple(range(n)), (0, 2)))
        assert rep.verdict and rep.sigma_min == pytest.approx(1)
    assert not discrete_sampling_check(DiscreteModel(4, (), (0,))).verdict
    assert discrete_sampling_check(DiscreteModel(4, (0, 1), (0, 1))).verdict


def test_interpolation_examples():
    assert discrete_interpolation_check(DiscreteModel(5, (0,), tuple(range(5)))).verdict
    assert not discrete_interpolation_check(DiscreteModel(5, tuple(range(5)), (0,))).verdict


def test_rank_deficient_instance_matches_exact_rank():
    m = DiscreteModel(6, (0, 2, 4), (0, 3))
    assert exact_rank_roots_of_unity(6, m.lam, m.spec) == 1
    assert not discrete_sampling_check(m).verdict
    assert not discrete_interpolation_check(m).verdict


@pytest.mark.parametrize("n", [4, 6])
def test_verdicts_match_exact_rank(n):
    rng = np.random.default_rng(n)
    for _ in range(25):
        lam = tuple(np.flatnonzero(rng.random(n) < 0.5).tolist())
        spec = tuple(np.flatnonzero(rng.random(n) < 0.5).tolist())
        if not lam or not spec:
            continue
        rank = exact_rank_roots_of_unity(n, lam, spec)
        m = DiscreteModel(n, lam, spec)
        assert discrete_sampling_check(m).verdict == (rank == len(spec))
        assert discrete_interpolation_check(m).verdict == (rank == len(lam))


@pytest.mark.parametrize("n", [2, 3, 5, 7])
def test_prime_modulus_follows_chebotarev(n):
    subsets = [s for k in range(n + 1) for s in itertools.combinations(range(n), k)]
    for lam in subsets:
        for spec in subsets:
            if spec:
                assert discrete_sampling_check(DiscreteModel(n, lam, spec)).verdict == chebotarev_samples(n, lam, spec)


def test_duality_examples():
    rep = discrete_duality_verify(DiscreteModel(4, (0, 1), (0, 1)))
    assert rep.sampling and rep.interpolation_complement
    rep = discrete_duality_verify(DiscreteModel(3, (0, 1, 2), (0, 1, 2)))
    assert rep.sampling and rep.interpolation_complement


subsets8 = st.lists(st.integers(0, 7), unique=True, max_size=8)


@given(subsets8, subsets8, st.integers(0, 7), st.integers(0, 7))
def test_sampling_translation_invariant(lam, spec, a, b):
    n = 8
    if not spec:
        return
    base = discrete_sampling_check(DiscreteModel(n, tuple(lam), tuple(spec)))
    moved = discrete_sampling_check(
        DiscreteModel(n, tuple((x + a) % n for x in lam), tuple((x + b) % n for x in spec))
    )
    assert base.verdict == moved.verdict
    assert abs(base.sigma_min - moved.sigma_min) < 1e-12


@given(subsets8, subsets8)
def test_complementation_is_an_involution(lam, spec):
    m = DiscreteModel(8, tuple(lam), tuple(spec))
    assert m.complement().complement() == m
    a = discrete_duality_verify(m)
    b = discrete_duality_verify(m.complement().complement())
    assert (a.sampling, a.interpolation_complement) == (b.sampling, b.interpolation_complement)


def test_model_validation():
    with pytest.raises(ValueError):
        DiscreteModel(4, (0, 0), ())
    with pytest.raises(ValueError):
        DiscreteModel(4, (4,), ())


def test_scan_small():
    stats = exhaustive_duality_scan(4, workers=1)
    assert stats.pairs == {1: 4, 2: 16, 3: 64, 4: 256}
    assert stats.failures == ()
    assert exhaustive_duality_scan(1, workers=1).total == 4


def test_scan_is_worker_independent():
    a = exhaustive_duality_scan(5, workers=1).to_dict()
    b = exhaustive_duality_scan(5, workers=3).to_dict()
    assert a == b


def test_scan_bounds():
    with pytest.raises(ValueError):
        exhaustive_duality_scan(13)
