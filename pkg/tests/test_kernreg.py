import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nlmsr.errors import ContractError, DegenerateSystemError, ParameterError
from nlmsr.kernreg import (
    RegressionConfig,
    SamplePoint,
    basis_row,
    basis_width,
    kernel_regress,
    kernel_weight,
    normal_equations,
    solve_normal_batch,
    vech,
    wls_solve,
)

from oracles import basis, naive_wls


def test_vech_and_basis_row():
    np.testing.assert_array_equal(vech(np.array([[1.0, 3.0], [3.0, 4.0]])), [1.0, 3.0, 4.0])
    with pytest.raises(ContractError):
        vech(np.array([[1.0, 2.0], [3.0, 4.0]]))
    np.testing.assert_array_equal(basis_row((2.0, -1.0), 2), [1, 2, -1, 4, -2, 1])
    np.testing.assert_array_equal(basis_row((2.0, -1.0), 1), [1, 2, -1])
    np.testing.assert_array_equal(basis_row((2.0, -1.0), 0), [1])
    assert [basis_width(o) for o in (0, 1, 2)] == [1, 3, 6]
    with pytest.raises(ParameterError):
        basis_width(3)


def test_kernel_weight_closed_form():
    assert kernel_weight((0.0, 0.0), np.eye(2)) == pytest.approx(1 / (2 * math.pi))
    H = np.diag([2.0, 0.5])
    t = np.array([1.0, 1.0])
    expect = math.exp(-0.5 * (0.25 + 4.0)) / (2 * math.pi * 1.0)
    assert kernel_weight(t, H) == pytest.approx(expect)
    with pytest.raises(ParameterError):
        kernel_weight(t, np.array([[1.0, 0.0], [0.0, -1.0]]))


def test_regression_config_validates():
    with pytest.raises(ParameterError):
        RegressionConfig(order=3)
    with pytest.raises(ParameterError):
        RegressionConfig(smoothing=np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_order0_is_weighted_mean():
    fit = wls_solve([[1.0]] * 3, [1.0, 2.0, 1.0], [3.0, 6.0, 9.0])
    assert fit.value == pytest.approx(6.0)
    assert not fit.fallback and fit.order == 0


def test_exact_fit_of_quadratic():
    pts = [(a, b) for a in (-1, 0, 1, 2) for b in (-1, 0, 1)]
    f = lambda x, y: 3 - 2 * x + 0.5 * y + x * x - 0.25 * x * y + 2 * y * y
    fit = wls_solve([basis(a, b, 2) for a, b in pts], [1.0] * len(pts), [f(a, b) for a, b in pts])
    np.testing.assert_allclose(fit.beta, [3, -2, 0.5, 1, -0.25, 2], atol=1e-10)


def test_degenerate_inputs():
    with pytest.raises(DegenerateSystemError):
        wls_solve([[1.0], [1.0]], [0.0, 0.0], [1.0, 2.0])
    with pytest.raises(ParameterError):
        wls_solve(np.zeros((0, 3)), [], [])
    with pytest.raises(ParameterError):
        wls_solve([[1.0, 0.0, 0.0]], [-1.0], [1.0])


def test_collinear_samples_fall_back_to_mean():
    # all samples on one line: order 1 is rank deficient
    rows = [basis(t, 2 * t, 1) for t in (-1.0, 0.0, 1.0, 2.0)]
    fit = wls_solve(rows, [1.0, 1.0, 2.0, 1.0], [1.0, 2.0, 3.0, 4.0])
    assert fit.fallback
    assert fit.value == pytest.approx((1 + 2 + 6 + 4) / 5)


def test_ridge_shrinks_toward_zero():
    rows = [basis(a, b, 1) for a in (-1, 0, 1) for b in (-1, 0, 1)]
    vals = [5 + 3 * r[1] - r[2] for r in rows]
    b0 = wls_solve(rows, [1.0] * 9, vals).beta
    b1 = wls_solve(rows, [1.0] * 9, vals, ridge=10.0).beta
    assert np.linalg.norm(b1) < np.linalg.norm(b0)
    # closed form for the ridge problem
    X = np.array(rows)
    expect = np.linalg.solve(X.T @ X + 10.0 * np.eye(3), X.T @ np.array(vals))
    np.testing.assert_allclose(b1, expect, atol=1e-10)


def test_batch_flags_empty_systems():
    A = np.zeros((3, 3, 2))
    A[:, :, 1] = np.eye(3)
    g = np.zeros((3, 2))
    g[:, 1] = [2.0, 1.0, 0.0]
    beta, bad = solve_normal_batch(A, g)
    assert bad[0] and not bad[1]
    assert math.isnan(beta[0, 0])
    np.testing.assert_allclose(beta[:, 1], [2, 1, 0])


def test_normal_equations_shape():
    A, xw = normal_equations([[1.0, 2.0, 3.0]] * 4, [1.0, 0.5, 0.5, 1.0])
    assert A.shape == (3, 3) and xw.shape == (3, 4)
    np.testing.assert_allclose(A, A.T)


def _random_system(r, order):
    m = basis_width(order)
    while True:
        n = int(r.integers(6, 21))
        d = r.uniform(-3, 3, (n, 2))
        rows = np.array([basis(a, b, order) for a, b in d])
        w = r.uniform(0.05, 1.0, n)
        if np.linalg.matrix_rank(rows) == m and np.linalg.cond((rows.T * w) @ rows) < 1e6:
            return rows, w, r.uniform(0, 255, n)


def test_matches_naive_oracle_many(rng):
    worst = 0.0
    for k in range(300):
        rows, w, y = _random_system(rng, k % 3)
        got = wls_solve(rows, w, y).beta
        worst = max(worst, float(np.max(np.abs(got - naive_wls(rows, w, y)))))
    assert worst < 1e-9


@settings(max_examples=60, deadline=None)
@given(
    st.integers(0, 2),
    st.lists(st.floats(-50, 50), min_size=6, max_size=6),
    st.floats(0.1, 10.0),
)
def test_polynomial_reproduction(order, coef, scale):
    coef = np.array(coef[: basis_width(order)])
    pts = [(scale * a, scale * b) for a in (-2, -1, 0, 1, 2) for b in (-2, -1, 0, 1, 2)]
    rows = np.array([basis(a, b, order) for a, b in pts])
    y = rows @ coef
    fit = wls_solve(rows, np.linspace(0.2, 1.0, len(pts)), y)
    assert not fit.fallback
    assert fit.value == pytest.approx(coef[0], abs=1e-7 * (1 + np.abs(coef).sum() * (1 + scale) ** 2))


@settings(max_examples=40, deadline=None)
@given(st.floats(-100, 100), st.floats(0.01, 100))
def test_weight_scaling_invariance(shift, s):
    rows = [basis(a, b, 1) for a in (-1, 0, 1) for b in (-1, 0, 1)]
    w = np.linspace(0.1, 1.0, 9)
    y = shift + np.arange(9.0)
    a = wls_solve(rows, w, y).beta
    b = wls_solve(rows, s * w, y).beta
    np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-9)


def test_kernel_regress_plane():
    f = lambda p: 10 + 2 * p[0] - 3 * p[1]
    samples = [SamplePoint((a, b), f((a, b))) for a in range(-2, 3) for b in range(-2, 3)]
    cfg = RegressionConfig(order=1, smoothing=1.5 * np.eye(2))
    assert kernel_regress(samples, (0.3, -0.4), cfg) == pytest.approx(f((0.3, -0.4)), abs=1e-10)
    cfg0 = RegressionConfig(order=0)
    assert kernel_regress(samples, (0.0, 0.0), cfg0) == pytest.approx(10.0, abs=1e-10)
    with pytest.raises(ParameterError):
        kernel_regress([], (0, 0), cfg)
