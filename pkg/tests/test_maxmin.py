import itertools
import math

import numpy as np
import pytest

from maxminlyap import fixtures
from maxminlyap.maxmin import (
    EXACT_SMOOTH,
    MaxMinSpec,
    QuadraticBasis,
    active_indices,
    all_permutations,
    clarke_gradient,
    combine,
    dualize,
    evaluate,
    phi,
    strict_ordering,
)
from maxminlyap.policy import NumericPolicy

POLICY = NumericPolicy()


def test_phi_benchmark_table():
    spec = fixtures.example1_spec()
    want = {
        (1, 2, 3): 3,
        (1, 3, 2): 3,
        (2, 1, 3): 3,
        (2, 3, 1): 3,
        (3, 1, 2): 1,
        (3, 2, 1): 2,
    }
    for rho, out in want.items():
        assert phi(spec, rho) == out


def test_phi_pure_max_selects_last():
    for K in (2, 3, 4):
        spec = MaxMinSpec(K=K, families=tuple((j,) for j in range(1, K + 1)))
        for rho in all_permutations(K):
            assert phi(spec, rho) == rho[-1]


def test_phi_single_base():
    spec = MaxMinSpec(K=1, families=((1,),))
    assert phi(spec, (1,)) == 1


def test_dualize_distributes():
    spec = MaxMinSpec(K=3, families=((1, 2), (3,)))
    dual = dualize(spec)
    assert dual.polarity == "minmax"
    assert set(dual.families) == {(1, 3), (2, 3)}


def test_dualize_single_family():
    spec = MaxMinSpec(K=2, families=((1, 2),))
    dual = dualize(spec)
    assert dual.polarity == "minmax"
    assert dual.families == ((1,), (2,))


def test_dualize_max_of_singletons():
    spec = MaxMinSpec(K=2, families=((1,), (2,)))
    dual = dualize(spec)
    assert dual.families == ((1, 2),)


def test_dualize_pointwise_equality():
    rng = np.random.default_rng(3)
    for _ in range(20):
        K = int(rng.integers(1, 5))
        J = int(rng.integers(1, 4))
        families = tuple(
            tuple(sorted(rng.choice(range(1, K + 1), size=rng.integers(1, K + 1), replace=False)))
            for _ in range(J)
        )
        spec = MaxMinSpec(K=K, families=families)
        dual = dualize(spec)
        for _ in range(500):
            vals = rng.standard_normal(K)
            assert combine(spec, vals) == combine(dual, vals)


def test_eval_zero_at_origin():
    basis = fixtures.example1_basis()
    spec = fixtures.example1_spec()
    assert evaluate(spec, basis, np.zeros(2)) == 0.0


def test_eval_min_of_quadratics():
    basis = fixtures.example2_basis()
    spec = fixtures.example2_spec()
    assert evaluate(spec, basis, np.array([1.0, 1.0])) == pytest.approx(6.0)


def test_eval_absolute_value():
    spec, basis = fixtures.onedim_abs_spec_basis()
    assert evaluate(spec, basis, np.array([-2.0])) == pytest.approx(2.0)


def test_active_smooth_interior_point():
    spec = fixtures.example2_spec()
    basis = fixtures.example2_basis()
    act = active_indices(spec, basis, np.array([1.0, 0.0]), POLICY)
    assert act.indices == (2,)
    assert act.method == EXACT_SMOOTH


def test_active_on_equal_value_line():
    spec = fixtures.example1_spec()
    basis = fixtures.example1_basis()
    v1 = fixtures.EXAMPLE1_LINES["S13"]
    act = active_indices(spec, basis, v1, POLICY)
    assert act.indices == (1, 3)
    v2 = fixtures.EXAMPLE1_LINES["S21"]
    assert active_indices(spec, basis, v2, POLICY).indices == (1, 2)
    v3 = fixtures.EXAMPLE1_LINES["S32"]
    assert active_indices(spec, basis, v3, POLICY).indices == (2, 3)


def test_active_absolute_value_kink():
    spec, basis = fixtures.onedim_abs_spec_basis()
    act = active_indices(spec, basis, np.array([0.0]), POLICY)
    assert act.indices == (1, 2)


def test_clarke_gradient_smooth():
    spec = fixtures.example2_spec()
    basis = fixtures.example2_basis()
    hull = clarke_gradient(spec, basis, np.array([1.0, 0.0]), POLICY)
    assert hull.indices == (2,)
    np.testing.assert_allclose(hull.vertices[0], [2.0, 0.0])


def test_clarke_gradient_benchmark_kink():
    spec = fixtures.example1_spec()
    basis = fixtures.example1_basis()
    v1 = fixtures.EXAMPLE1_LINES["S13"]
    hull = clarke_gradient(spec, basis, v1, POLICY)
    assert hull.indices == (1, 3)
    np.testing.assert_allclose(hull.vertices[0], 2.0 * fixtures.EXAMPLE1_P[0] @ v1)
    np.testing.assert_allclose(hull.vertices[1], 2.0 * fixtures.EXAMPLE1_P[2] @ v1)


def test_clarke_gradient_absolute_value():
    spec, basis = fixtures.onedim_abs_spec_basis()
    hull = clarke_gradient(spec, basis, np.array([0.0]), POLICY)
    got = sorted(float(v[0]) for v in hull.vertices)
    assert got == [-1.0, 1.0]


def test_homogeneity_of_quadratic_maxmin():
    rng = np.random.default_rng(21)
    spec = fixtures.example1_spec()
    basis = fixtures.example1_basis()
    for _ in range(50):
        x = rng.standard_normal(2)
        if np.linalg.norm(x) < 1e-3:
            continue
        base_val = evaluate(spec, basis, x)
        base_act = active_indices(spec, basis, x, POLICY).indices
        for lam in (-2.0, -1.0, 0.5, 3.0):
            assert evaluate(spec, basis, lam * x) == pytest.approx(
                lam * lam * base_val, rel=1e-12
            )
            assert active_indices(spec, basis, lam * x, POLICY).indices == base_act


def test_phi_consistency_at_strict_points():
    rng = np.random.default_rng(22)
    spec = fixtures.example1_spec()
    basis = fixtures.example1_basis()
    for _ in range(300):
        x = rng.standard_normal(2)
        rho = strict_ordering(basis.values(x))
        if rho is None:
            continue
        act = active_indices(spec, basis, x, POLICY)
        assert act.indices == (phi(spec, rho),)


def test_active_set_invariants_random():
    # nonempty, and contained in the equal-value tie set
    rng = np.random.default_rng(23)
    spec = fixtures.example1_spec()
    basis = fixtures.example1_basis()
    from maxminlyap.maxmin import equal_value_indices

    for _ in range(200):
        x = rng.standard_normal(2) * rng.uniform(0.1, 3.0)
        act = active_indices(spec, basis, x, POLICY)
        ties, _ = equal_value_indices(spec, basis, x, POLICY)
        assert len(act.indices) >= 1
        assert set(act.indices) <= set(ties)


def test_active_at_origin_covers_all_cones():
    spec = fixtures.example2_spec()
    basis = fixtures.example2_basis()
    act = active_indices(spec, basis, np.zeros(2), POLICY)
    assert act.indices == (1, 2)


def test_degenerate_duplicate_basis_warns():
    spec = MaxMinSpec(K=2, families=((1, 2),))
    basis = QuadraticBasis([np.eye(2), np.eye(2)])
    act = active_indices(spec, basis, np.array([1.0, 1.0]), POLICY)
    assert act.warning is not None


def test_validation_rejects_bad_spec():
    with pytest.raises(Exception):
        MaxMinSpec(K=2, families=((1, 3),))
    with pytest.raises(Exception):
        MaxMinSpec(K=2, families=())


def test_phi_rejects_wrong_polarity():
    spec = MaxMinSpec(K=2, families=((1, 2),), polarity="minmax")
    with pytest.raises(Exception):
        phi(spec, (1, 2))


def test_minmax_evaluation_and_active():
    # dual representation evaluates identically and yields the same sets
    spec = fixtures.example1_spec()
    dual = dualize(spec)
    basis = fixtures.example1_basis()
    rng = np.random.default_rng(31)
    for _ in range(100):
        x = rng.standard_normal(2)
        assert evaluate(spec, basis, x) == evaluate(dual, basis, x)
    v1 = fixtures.EXAMPLE1_LINES["S13"]
    assert active_indices(dual, basis, v1, POLICY).indices == (1, 3)


def test_permutations_are_lexicographic():
    perms = all_permutations(3)
    assert perms == sorted(perms)
    assert perms[0] == (1, 2, 3)
    assert len(set(perms)) == 6


def test_large_K_permutation_count():
    assert len(all_permutations(4)) == math.factorial(4)
    assert len(list(itertools.permutations(range(1, 6)))) == 120
