import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from windstat.stats import EstimatorAccumulator

finite = st.floats(min_value=-1e6, max_value=1e6,
                   allow_nan=False, allow_infinity=False)
cvalues = st.lists(st.tuples(finite, finite), min_size=2, max_size=60)


def _fill(values):
    acc = EstimatorAccumulator()
    for re, im in values:
        acc.add(complex(re, im))
    return acc


def test_matches_numpy_moments():
    rng = np.random.default_rng(3)
    x = rng.standard_normal(500) + 1j * rng.standard_normal(500)
    acc = EstimatorAccumulator()
    acc.add_batch(x)
    assert acc.count == 500
    assert acc.mean == pytest.approx(complex(x.mean()), abs=1e-12)
    assert acc.variance_real() == pytest.approx(np.var(x.real, ddof=1), rel=1e-12)
    assert acc.variance_imag() == pytest.approx(np.var(x.imag, ddof=1), rel=1e-12)
    cov = np.cov(x.real, x.imag, ddof=1)[0, 1]
    assert acc.covariance() == pytest.approx(cov, rel=1e-10, abs=1e-12)
    assert acc.stderr_real() == pytest.approx(
        np.std(x.real, ddof=1) / np.sqrt(500), rel=1e-12)


@given(cvalues, st.integers(min_value=1, max_value=59))
@settings(max_examples=150, deadline=None)
def test_merge_equals_single_pass(values, cut):
    cut = min(cut, len(values) - 1)
    whole = _fill(values)
    left = _fill(values[:cut])
    right = _fill(values[cut:])
    left.merge(right)
    assert left.count == whole.count
    assert left.mean.real == pytest.approx(whole.mean.real, abs=1e-7)
    assert left.mean.imag == pytest.approx(whole.mean.imag, abs=1e-7)
    assert left.variance() == pytest.approx(whole.variance(),
                                            rel=1e-7, abs=1e-7)


@given(cvalues)
@settings(max_examples=100, deadline=None)
def test_merge_is_associative(values):
    third = max(1, len(values) // 3)
    parts = [values[:third], values[third:2 * third], values[2 * third:]]
    parts = [p for p in parts if p]
    left_assoc = _fill(parts[0])
    for p in parts[1:]:
        left_assoc.merge(_fill(p))
    right_assoc = _fill(parts[-1])
    for p in reversed(parts[:-1]):
        folded = _fill(p)
        folded.merge(right_assoc)
        right_assoc = folded
    assert left_assoc.count == right_assoc.count
    assert left_assoc.mean.real == pytest.approx(right_assoc.mean.real, abs=1e-7)
    assert left_assoc.variance() == pytest.approx(right_assoc.variance(),
                                                  rel=1e-7, abs=1e-7)


def test_add_batch_equals_adds():
    rng = np.random.default_rng(9)
    x = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    one = EstimatorAccumulator()
    for v in x:
        one.add(v)
    other = EstimatorAccumulator()
    other.add_batch(x[:20])
    other.add_batch(x[20:20])  # empty slice is a no-op
    other.add_batch(x[20:])
    assert other.count == one.count
    assert other.mean == pytest.approx(one.mean, abs=1e-12)
    assert other.variance() == pytest.approx(one.variance(), rel=1e-10)


def test_real_data_has_no_imaginary_spread():
    acc = EstimatorAccumulator()
    acc.add_batch(np.arange(10.0))
    assert acc.variance_imag() == 0.0
    assert acc.covariance() == 0.0


def test_empty_and_singleton_edges():
    acc = EstimatorAccumulator()
    assert acc.count == 0
    assert acc.stderr_real() == float("inf")
    acc.add(2.0)
    assert acc.variance() == 0.0
    acc.merge(EstimatorAccumulator())
    assert acc.count == 1
