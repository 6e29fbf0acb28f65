"""Special-function layer: Euler beta and the per-mode inside probabilities.

Oracles: scipy.special.betainc, direct quadrature of the beta density,
and exact rational values for small cases. Neither route under test is
used to generate its own expected value.
"""

import math

import numpy as np
import pytest
import scipy.integrate
import scipy.special
from hypothesis import given, settings
from hypothesis import strategies as st

from windstat import specfun


def test_euler_beta_small_rationals():
    assert specfun.euler_beta(1, 1) == pytest.approx(1.0, abs=1e-15)
    assert specfun.euler_beta(2, 3) == pytest.approx(1.0 / 12.0, rel=1e-14)
    assert specfun.euler_beta(3, 3) == pytest.approx(1.0 / 30.0, rel=1e-14)


def test_euler_beta_rejects_nonpositive():
    with pytest.raises(ValueError):
        specfun.log_euler_beta(0.0, 1.0)
    with pytest.raises(ValueError):
        specfun.log_euler_beta(2.0, -3.0)


def test_regularized_incomplete_beta_vs_scipy():
    rng = np.random.default_rng(5)
    a = 10.0 ** rng.uniform(-1, 2, size=200)
    b = 10.0 ** rng.uniform(-1, 2, size=200)
    x = rng.uniform(0, 1, size=200)
    for ai, bi, xi in zip(a, b, x):
        assert specfun.regularized_incomplete_beta(ai, bi, xi) == pytest.approx(
            scipy.special.betainc(ai, bi, xi), abs=1e-13, rel=1e-12)


@pytest.mark.parametrize("m,N,q2", [(1, 1, 1.0), (2, 5, 0.3), (4, 7, 2.0),
                                    (6, 6, 1.0), (1, 8, 10.0)])
def test_u_fn_vs_quadrature(m, N, q2):
    s = q2 / (1.0 + q2)
    norm = specfun.euler_beta(m, N - m + 1)
    val, err = scipy.integrate.quad(
        lambda t: t ** (m - 1) * (1 - t) ** (N - m) / norm, 0.0, s)
    assert err < 1e-10
    assert specfun.u_fn(m, N, q2) == pytest.approx(val, abs=1e-10)


def test_u_fn_known_values():
    assert specfun.u_fn(1, 1, 1.0) == pytest.approx(0.5, abs=1e-15)
    assert specfun.u_fn(1, 2, 1.0) == pytest.approx(0.75, abs=1e-15)
    # N = 6 at the symmetric radius: binomial tail sums k = m..6 of C(6,k)/64
    exact = [63 / 64, 57 / 64, 42 / 64, 22 / 64, 7 / 64, 1 / 64]
    got = [specfun.u_fn(m, 6, 1.0) for m in range(1, 7)]
    np.testing.assert_allclose(got, exact, atol=1e-14)


def test_u_fn_limits():
    assert specfun.u_fn(3, 5, 0.0) == 0.0
    assert specfun.u_fn(3, 5, math.inf) == 1.0


def test_u_fn_validates_indices():
    with pytest.raises(ValueError):
        specfun.u_fn(0, 4, 1.0)
    with pytest.raises(ValueError):
        specfun.u_fn(5, 4, 1.0)
    with pytest.raises(ValueError):
        specfun.u_fn(2, 4, -0.5)


@st.composite
def _mode_and_size(draw):
    N = draw(st.integers(min_value=1, max_value=40))
    m = draw(st.integers(min_value=1, max_value=N))
    return m, N


@given(_mode_and_size(), st.floats(min_value=1e-6, max_value=1e6))
@settings(max_examples=200, deadline=None)
def test_u_fn_is_a_probability_and_v_complements(mn, q2):
    m, N = mn
    u = specfun.u_fn(m, N, q2)
    assert 0.0 <= u <= 1.0
    assert specfun.v_fn(m, N, q2) == 1.0 - u  # exact by construction


@given(_mode_and_size(), st.floats(min_value=1e-4, max_value=1e4),
       st.floats(min_value=1.01, max_value=100.0))
@settings(max_examples=200, deadline=None)
def test_u_fn_monotone_in_radius(mn, q2, factor):
    m, N = mn
    assert specfun.u_fn(m, N, q2 * factor) >= specfun.u_fn(m, N, q2)


@given(_mode_and_size(), st.floats(min_value=1e-3, max_value=1e3))
@settings(max_examples=200, deadline=None)
def test_u_fn_inversion_symmetry(mn, q2):
    # swapping inside and outside: u_m(N, q^2) + u_{N+1-m}(N, 1/q^2) = 1
    m, N = mn
    total = specfun.u_fn(m, N, q2) + specfun.u_fn(N + 1 - m, N, 1.0 / q2)
    assert total == pytest.approx(1.0, abs=1e-12)


@given(_mode_and_size())
@settings(max_examples=100, deadline=None)
def test_u_fn_decreasing_in_mode(mn):
    # higher modes sit farther out, so they are less likely to fall inside
    m, N = mn
    if m < N:
        assert specfun.u_fn(m + 1, N, 1.0) <= specfun.u_fn(m, N, 1.0)
