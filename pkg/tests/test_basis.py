"""Basis enumeration, evaluation, and expansion against independent oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cdapprox.basis import (
    BasisSpec,
    Family,
    basis_size,
    enumerate_indices,
    eval_basis,
    eval_basis_batch,
    grevlex_position,
    monomial_expansion_matrix,
    specialize_last_variable,
    y_power_matrix,
)

small_p = st.integers(min_value=1, max_value=4)
small_d = st.integers(min_value=0, max_value=6)


def test_basis_size_matches_binomial():
    assert basis_size(2, 2) == 6
    assert basis_size(3, 8) == 165
    assert basis_size(1, 7) == 8
    for p in range(1, 5):
        for d in range(7):
            assert basis_size(p, d) == math.comb(p + d, d)


def test_basis_size_rejects_bad_arguments():
    with pytest.raises(ValueError):
        basis_size(0, 3)
    with pytest.raises(ValueError):
        basis_size(2, -1)
    with pytest.raises(OverflowError):
        basis_size(40, 40)


def test_grevlex_order_p2_d2():
    spec = BasisSpec(2, 2)
    expected = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert [tuple(a) for a in enumerate_indices(spec)] == expected


def test_grevlex_order_p3_d2_block():
    # degree-2 block in 3 variables: x^2, xy, y^2, xz, yz, z^2
    spec = BasisSpec(3, 2)
    idx = [tuple(a) for a in enumerate_indices(spec)]
    assert idx[4:] == [(2, 0, 0), (1, 1, 0), (0, 2, 0), (1, 0, 1), (0, 1, 1), (0, 0, 2)]


@given(p=small_p, d=small_d)
def test_grevlex_degree_blocks_and_tie_break(p, d):
    idx = enumerate_indices(BasisSpec(p, d))
    assert idx.shape == (basis_size(p, d), p)
    totals = idx.sum(axis=1)
    assert np.all(np.diff(totals) >= 0)
    for i in range(len(idx) - 1):
        if totals[i] == totals[i + 1]:
            assert tuple(idx[i][::-1]) < tuple(idx[i + 1][::-1])


@given(p=small_p, d=small_d)
def test_grevlex_nesting(p, d):
    # the degree-d enumeration is a prefix of the degree-(d+1) enumeration
    lo = enumerate_indices(BasisSpec(p, d))
    hi = enumerate_indices(BasisSpec(p, d + 1))
    assert np.array_equal(hi[: len(lo)], lo)


@given(p=small_p, d=small_d)
def test_grevlex_position_roundtrip(p, d):
    pos = grevlex_position(p, d)
    idx = enumerate_indices(BasisSpec(p, d))
    for i, a in enumerate(idx):
        assert pos[tuple(a)] == i


def test_spec_validation():
    with pytest.raises(ValueError):
        BasisSpec(2, 2, domain=((-1.0, 1.0),))  # wrong axis count
    with pytest.raises(ValueError):
        BasisSpec(1, 2, domain=((1.0, 1.0),))  # degenerate axis
    spec = BasisSpec(2, 3)
    assert spec.domain == ((-1.0, 1.0), (-1.0, 1.0))
    assert spec.domain_volume() == pytest.approx(4.0)
    assert spec.domain_diameter() == pytest.approx(2.0 * math.sqrt(2.0))


def test_x_spec_drops_last_axis():
    spec = BasisSpec(3, 4, domain=((-1, 1), (0, 2), (-3, -1)))
    xs = spec.x_spec()
    assert xs.p == 2 and xs.d == 4
    assert xs.domain == ((-1.0, 1.0), (0.0, 2.0))
    with pytest.raises(ValueError):
        BasisSpec(1, 2).x_spec()


def test_contains():
    spec = BasisSpec(2, 2, domain=((0, 1), (-1, 1)))
    flags = spec.contains(np.array([[0.5, 0.0], [1.5, 0.0], [0.5, -2.0]]))
    assert list(flags) == [True, False, False]


@given(
    p=st.integers(min_value=1, max_value=3),
    d=st.integers(min_value=0, max_value=5),
    data=st.data(),
)
@settings(max_examples=50)
def test_monomial_values_match_naive_products(p, d, data):
    z = np.array(
        [data.draw(st.floats(min_value=-1, max_value=1, allow_nan=False)) for _ in range(p)]
    )
    spec = BasisSpec(p, d, family=Family.MONOMIAL_GREVLEX)
    vals = eval_basis(spec, z)
    naive = [math.prod(z[k] ** a[k] for k in range(p)) for a in enumerate_indices(spec)]
    np.testing.assert_allclose(vals, naive, rtol=1e-12, atol=1e-12)


def test_orthonormal_legendre_matches_clenshaw():
    # oracle: numpy's Clenshaw evaluation of each normalized Legendre series
    lo, hi = -0.5, 2.0
    w = hi - lo
    spec = BasisSpec(1, 6, family=Family.LEGENDRE_ORTHONORMAL, domain=((lo, hi),))
    t = np.linspace(lo, hi, 17)
    u = (2.0 * t - (lo + hi)) / w
    table = eval_basis_batch(spec, t[:, None])
    for k in range(7):
        ref = np.polynomial.legendre.legval(u, np.eye(7)[k]) * math.sqrt((2 * k + 1) / w)
        np.testing.assert_allclose(table[:, k], ref, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("domain", [((-1.0, 1.0),) * 2, ((0.0, 3.0), (-2.0, -1.0))])
def test_orthonormality_under_quadrature(domain):
    # Gram matrix under an exact Gauss-Legendre rule must be the identity
    spec = BasisSpec(2, 4, family=Family.LEGENDRE_ORTHONORMAL, domain=domain)
    u, w = np.polynomial.legendre.leggauss(12)
    axes = [
        (lo + 0.5 * (hi - lo) * (u + 1.0), 0.5 * (hi - lo) * w) for lo, hi in domain
    ]
    X, Y = np.meshgrid(axes[0][0], axes[1][0], indexing="ij")
    W = np.multiply.outer(axes[0][1], axes[1][1]).ravel()
    Z = np.stack([X.ravel(), Y.ravel()], axis=1)
    B = eval_basis_batch(spec, Z)
    gram = (B * W[:, None]).T @ B
    np.testing.assert_allclose(gram, np.eye(spec.size), atol=1e-12)


def test_eval_basis_warns_outside_box():
    spec = BasisSpec(2, 2)
    with pytest.warns(RuntimeWarning):
        eval_basis(spec, np.array([1.5, 0.0]))
    # monomials are global; no warning
    mono = BasisSpec(2, 2, family=Family.MONOMIAL_GREVLEX)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("error")
        eval_basis(mono, np.array([1.5, 0.0]))


def test_eval_basis_input_validation():
    spec = BasisSpec(2, 2)
    with pytest.raises(ValueError):
        eval_basis(spec, np.array([0.1, 0.2, 0.3]))
    with pytest.raises(ValueError):
        eval_basis(spec, np.array([np.nan, 0.0]))
    with pytest.raises(ValueError):
        eval_basis_batch(spec, np.zeros((4, 3)))


def test_y_power_matrix_expands_axis_family():
    lo, hi = 0.0, 2.0
    spec = BasisSpec(2, 5, domain=((-1, 1), (lo, hi)))
    U = y_power_matrix(spec)
    t = np.linspace(lo, hi, 9)
    table = eval_basis_batch(
        BasisSpec(1, 5, family=spec.family, domain=((lo, hi),)), t[:, None]
    )
    for k in range(6):
        np.testing.assert_allclose(
            np.polynomial.polynomial.polyval(t, U[k]), table[:, k], rtol=1e-10, atol=1e-12
        )


def test_y_power_matrix_monomial_is_identity():
    spec = BasisSpec(2, 4, family=Family.MONOMIAL_GREVLEX)
    np.testing.assert_array_equal(y_power_matrix(spec), np.eye(5))


@given(d=st.integers(min_value=0, max_value=5), data=st.data())
@settings(max_examples=40)
def test_monomial_expansion_matrix_identity(d, data):
    z = np.array(
        [data.draw(st.floats(min_value=-1, max_value=1, allow_nan=False)) for _ in range(2)]
    )
    spec = BasisSpec(2, d, family=Family.LEGENDRE_ORTHONORMAL)
    G = monomial_expansion_matrix(spec)
    mono = eval_basis(BasisSpec(2, d, family=Family.MONOMIAL_GREVLEX), z)
    np.testing.assert_allclose(G @ mono, eval_basis(spec, z), rtol=1e-9, atol=1e-9)


@pytest.mark.parametrize("family", list(Family))
def test_specialize_last_variable_agrees_with_direct_eval(family):
    rng = np.random.default_rng(7)
    spec = BasisSpec(2, 4, family=family)
    coeffs = rng.normal(size=spec.size)
    for x in (-0.9, -0.2, 0.4, 1.0):
        c = specialize_last_variable(spec, coeffs, [x])
        assert c.shape == (5,)
        for y in np.linspace(-1, 1, 7):
            direct = float(coeffs @ eval_basis(spec, [x, y]))
            assert np.polynomial.polynomial.polyval(y, c) == pytest.approx(direct, abs=1e-10)


def test_specialize_last_variable_p3():
    rng = np.random.default_rng(11)
    spec = BasisSpec(3, 3)
    coeffs = rng.normal(size=spec.size)
    x = np.array([0.3, -0.7])
    c = specialize_last_variable(spec, coeffs, x)
    for y in (-0.8, 0.1, 0.9):
        direct = float(coeffs @ eval_basis(spec, [x[0], x[1], y]))
        assert np.polynomial.polynomial.polyval(y, c) == pytest.approx(direct, abs=1e-10)


def test_specialize_last_variable_validation():
    spec = BasisSpec(2, 2)
    with pytest.raises(ValueError):
        specialize_last_variable(spec, np.ones(5), [0.0])
    with pytest.raises(ValueError):
        specialize_last_variable(spec, np.ones(6), [0.0, 0.0])
