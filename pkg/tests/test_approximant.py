"""Fiber minimization and the graph approximant."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cdapprox.approximant import (
    ApproxConfig,
    Approximant,
    derivative_bound,
    partial_argmin,
)
from cdapprox.basis import BasisSpec, Family
from cdapprox.benchmarks import get_benchmark
from cdapprox.cdkernel import CDKernel
from cdapprox.moments import reference_moment_matrix


def sign_argmin_coeffs(x):
    # quartic family in y whose fiber argmin over [-1, 1] is sign(x)
    return np.array([4.0, -3.0 * x, -4.0, x, 2.0])


def abs_argmin_coeffs(x):
    # quartic family in y whose fiber argmin over [-1, 1] is |x|
    return np.array([11.0, -12.0 * x**4, -6.0 * x**2, 4.0 * x**2, 3.0])


def brute_argmin(c, interval, n=100_001):
    ys = np.linspace(interval[0], interval[1], n)
    qs = np.polynomial.polynomial.polyval(ys, c)
    return float(ys[int(np.argmin(qs))])


def test_partial_argmin_recovers_sign():
    # near the flat boundary minimum the argmin is conditioned like
    # sqrt(eps |q| / q''), so 1e-6 is all double precision supports
    for x in (-0.9, -0.5, -0.01, 0.01, 0.5, 0.9):
        y, q = partial_argmin(sign_argmin_coeffs(x), (-1.0, 1.0))
        assert y == pytest.approx(np.sign(x), abs=1e-6)
        assert q == pytest.approx(
            np.polynomial.polynomial.polyval(y, sign_argmin_coeffs(x)), rel=1e-12
        )


def test_partial_argmin_recovers_abs():
    for x in (-0.8, -0.3, 0.2, 0.7, 1.0):
        y, _ = partial_argmin(abs_argmin_coeffs(x), (-1.0, 1.0))
        assert y == pytest.approx(abs(x), abs=1e-6)


def test_symmetric_fiber_ties_to_smaller_minimizer():
    # the x = 0 fiber of the sign quartic has argmin {-1, +1}
    y, _ = partial_argmin(sign_argmin_coeffs(0.0), (-1.0, 1.0))
    assert y == pytest.approx(-1.0, abs=1e-6)
    y, _ = partial_argmin(np.array([0.0625, 0.0, -0.5, 0.0, 1.0]), (-1.0, 1.0))
    assert y == pytest.approx(-0.5, abs=1e-6)  # (y^2 - 1/4)^2, leftmost of +-1/2


@given(
    c1=st.floats(min_value=-3, max_value=3),
    c2=st.floats(min_value=0.1, max_value=5),
    shift=st.floats(min_value=-2, max_value=2),
)
@settings(max_examples=60)
def test_quadratic_argmin(c1, c2, shift):
    y, q = partial_argmin(np.array([shift, c1, c2]), (-1.0, 1.0))
    expected = float(np.clip(-c1 / (2.0 * c2), -1.0, 1.0))
    assert y == pytest.approx(expected, abs=1e-6)
    assert q <= np.polynomial.polynomial.polyval(expected, [shift, c1, c2]) + 1e-12


@given(data=st.data())
@settings(max_examples=40, deadline=None)
def test_value_within_epsilon_of_brute_minimum(data):
    deg = data.draw(st.integers(min_value=2, max_value=8))
    c = np.array(
        [data.draw(st.floats(min_value=-10, max_value=10)) for _ in range(deg + 1)]
    )
    eps = data.draw(st.sampled_from([1e-3, 1e-6, 1e-9]))
    _, q = partial_argmin(c, (-1.0, 1.0), epsilon=eps)
    ys = np.linspace(-1, 1, 200_001)
    true_min = float(np.polynomial.polynomial.polyval(ys, c).min())
    assert q <= true_min + eps + 1e-12 * max(1.0, abs(true_min))


def test_robust_window_widens_selection():
    # 0.1 (y^2 - 0.36)^2 - 0.001 y + 0.002: wells near +-0.6 with values
    # ~0.0014 and ~0.0026.  Plain selection takes the right well; with
    # alpha = 0.9 every y with q(y) <= 19 * qmin is acceptable and the
    # smallest such y (left flank of the left well) is returned.
    c = np.array([0.01496, -0.001, -0.072, 0.0, 0.1])
    y_plain, _ = partial_argmin(c, (-1.0, 1.0))
    assert y_plain == pytest.approx(0.6, abs=2e-2)
    y_robust, q_robust = partial_argmin(c, (-1.0, 1.0), alpha=0.9)
    ys = np.linspace(-1, 1, 2_000_001)
    qs = np.polynomial.polynomial.polyval(ys, c)
    thresh = 19.0 * qs.min()
    brute_left = float(ys[qs <= thresh].min())
    assert y_robust == pytest.approx(brute_left, abs=1e-3)
    assert q_robust <= thresh * (1.0 + 1e-6)


def test_partial_argmin_validation():
    with pytest.raises(ValueError):
        partial_argmin(np.array([1.0, 2.0]), (1.0, 1.0))
    with pytest.raises(ValueError):
        partial_argmin(np.array([1.0, np.nan]), (-1.0, 1.0))


def test_derivative_bound_dominates_true_derivative():
    rng = np.random.default_rng(2)
    for _ in range(50):
        c = rng.normal(size=rng.integers(2, 9)) * 10
        interval = sorted(rng.uniform(-2, 2, size=2))
        if interval[0] == interval[1]:
            continue
        lam = derivative_bound(c, interval)
        ys = np.linspace(interval[0], interval[1], 2001)
        dc = np.polynomial.polynomial.polyder(c)
        assert lam >= np.max(np.abs(np.polynomial.polynomial.polyval(ys, dc))) - 1e-9


def test_config_validation_and_resolution(monkeypatch):
    with pytest.raises(ValueError):
        ApproxConfig(alpha=1.0)
    with pytest.raises(ValueError):
        ApproxConfig(coarse_points=2)
    assert ApproxConfig(epsilon=1e-4).resolve_epsilon() == 1e-4
    assert ApproxConfig(gamma=1e-2).resolve_epsilon() == 5e-3
    assert ApproxConfig().resolve_epsilon() is None
    assert ApproxConfig(threads=3).resolve_threads() == 3
    monkeypatch.setenv("CDAPPROX_THREADS", "5")
    assert ApproxConfig().resolve_threads() == 5
    monkeypatch.delenv("CDAPPROX_THREADS")
    assert ApproxConfig().resolve_threads() == 1


@pytest.mark.parametrize("family", list(Family))
def test_y_coefficients_reproduce_kernel(family):
    # the scatter/expansion route must agree with direct kernel evaluation
    M = get_benchmark("sign").moment_matrix(3, family=family)
    kern = CDKernel(M, 1e-4)
    app = Approximant(kern)
    rng = np.random.default_rng(9)
    for x in rng.uniform(-1, 1, size=5):
        c = app.y_coefficients([x])
        assert c.shape == (7,)
        for y in rng.uniform(-1, 1, size=5):
            direct = kern.eval_q([x, y])
            poly = float(np.polynomial.polynomial.polyval(y, c))
            assert poly == pytest.approx(direct, rel=1e-9, abs=1e-12)


def test_y_coefficients_reproduce_kernel_p3():
    M = get_benchmark("disk1").moment_matrix(2)
    kern = CDKernel(M, 1e-4)
    app = Approximant(kern)
    rng = np.random.default_rng(10)
    for _ in range(5):
        x = rng.uniform(-1, 1, size=2)
        c = app.y_coefficients(x)
        y = rng.uniform(-1, 1)
        direct = kern.eval_q([x[0], x[1], y])
        assert float(np.polynomial.polynomial.polyval(y, c)) == pytest.approx(
            direct, rel=1e-9, abs=1e-12
        )


def test_evaluate_matches_batch_and_threads():
    M = get_benchmark("sign").moment_matrix(3)
    app1 = Approximant(CDKernel(M, 1e-6), ApproxConfig(threads=1))
    app2 = Approximant(CDKernel(M, 1e-6), ApproxConfig(threads=2))
    X = np.linspace(-1, 1, 9)[:, None]
    ys1, qs1 = app1.evaluate_batch(X)
    ys2, qs2 = app2.evaluate_batch(X)
    np.testing.assert_array_equal(ys1, ys2)
    np.testing.assert_array_equal(qs1, qs2)
    y0, q0 = app1.evaluate(X[3])
    assert ys1[3] == y0 and qs1[3] == q0


def test_approximant_tracks_sign_function():
    M = get_benchmark("sign").moment_matrix(4)
    app = Approximant(CDKernel(M, 1e-8))
    y_neg, _ = app.evaluate([-0.5])
    y_pos, _ = app.evaluate([0.5])
    assert y_neg == pytest.approx(-1.0, abs=1e-3)
    assert y_pos == pytest.approx(1.0, abs=1e-3)
    # at the jump the argmin set is {-1, +1}; the smaller one is returned
    y_zero, _ = app.evaluate([0.0])
    assert y_zero == pytest.approx(-1.0, abs=1e-3)


def test_approximant_validation():
    M = reference_moment_matrix(BasisSpec(1, 2))
    with pytest.raises(ValueError, match="p >= 2"):
        Approximant(CDKernel(M, 1e-3))
    M2 = get_benchmark("sign").moment_matrix(2)
    app = Approximant(CDKernel(M2, 1e-3))
    with pytest.raises(ValueError):
        app.evaluate([0.1, 0.2])
    with pytest.raises(ValueError):
        app.evaluate_batch(np.zeros((3, 2)))


def test_custom_y_interval_restricts_search():
    # restricting the fiber to [0, 1] forces the positive branch at x < 0
    M = get_benchmark("sign").moment_matrix(4)
    app = Approximant(CDKernel(M, 1e-8), ApproxConfig(y_interval=(0.0, 1.0)))
    y, _ = app.evaluate([-0.5])
    assert 0.0 <= y <= 1.0
