import numpy as np
import pytest
from hypothesis import given, strategies as st

from qobserver.bounds import (
    barred_bound_matrices,
    bound_matrices,
    verify_ineq1,
    verify_ineq2,
    weighted_cross_bound_check,
)
from qobserver.estimators import kalman_limit_epsilons
from qobserver.model import SystemModel, UncertaintyBounds, sample_admissible

from helpers import matrices, spd_matrices

MODEL = SystemModel(G=np.diag([-0.05, 2.0]), Ctilde=[1, 0.5j], B=[0, 1])


def test_bound_matrices_frozen():
    bounds = UncertaintyBounds(0.25, 0.04, 0.09)
    bm = bound_matrices(kalman_limit_epsilons(bounds), bounds, MODEL)
    np.testing.assert_allclose(bm.Q1, np.diag([1.23, 1.005]), atol=1e-14)
    np.testing.assert_allclose(bm.Q2, np.diag([1.13, 1.663333333333334]), atol=1e-14)
    np.testing.assert_allclose(bm.Q3, np.diag([1.005, 1.13]), atol=1e-14)
    assert bm.mu1 == pytest.approx(1.5333333333333332)
    assert bm.mu2 == pytest.approx(2.3666666666666663)


def test_barred_blocks():
    bounds = UncertaintyBounds(0.25, 0.04, 0.09)
    bm = bound_matrices(kalman_limit_epsilons(bounds), bounds, MODEL)
    Qbar1, Qbar2, Qbar3 = barred_bound_matrices(bm, [0.0, 0.0], MODEL)
    np.testing.assert_array_equal(Qbar1[2:, 2:], 0)
    np.testing.assert_allclose(Qbar2, np.kron(np.ones((2, 2)), bm.Q2))
    np.testing.assert_allclose(Qbar3, np.kron(np.ones((2, 2)), bm.Q3))


def test_bad_weights():
    with pytest.raises(ValueError):
        bound_matrices((1.0,) * 7, UncertaintyBounds(0.1), MODEL)
    with pytest.raises(ValueError):
        bound_matrices((1.0,) * 7 + (0.0,), UncertaintyBounds(0.1), MODEL)


@given(X=matrices(2, 3), Y=matrices(2, 3), eps=st.floats(1e-3, 1e3))
def test_weighted_cross_bound(X, Y, eps):
    scale = 1.0 + eps * np.abs(X).max() ** 2 + np.abs(Y).max() ** 2 / eps
    assert weighted_cross_bound_check(X, Y, eps) >= -1e-12 * scale


weights = st.lists(st.floats(1e-2, 10.0), min_size=8, max_size=8)
gains = st.tuples(st.floats(-5, 5), st.floats(-5, 5))


@given(
    g=st.floats(0.0, 1.0), r1=st.floats(0.0, 0.5), r2=st.floats(0.0, 0.5),
    seed=st.integers(0, 2**32 - 1), eps=weights, k=gains, Xbar=spd_matrices(n=4, low=0.01),
)
def test_perturbation_bounds_hold(g, r1, r2, seed, eps, k, Xbar):
    bounds = UncertaintyBounds(g, r1, r2)
    u = sample_admissible(bounds, seed)
    bm = bound_matrices(eps, bounds, MODEL)
    assert verify_ineq1(Xbar, u, MODEL, k, bm) >= -1e-8 * max(1.0, np.abs(Xbar).max()) ** 2
    assert verify_ineq2(u, MODEL, k, bm) >= -1e-8
