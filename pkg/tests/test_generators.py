"""Generating function: closed determinant ratio, MC, derivative bridge,
and the Pfaffian reference used by the quaternion class."""

import math

import numpy as np
import pytest

from windstat import correlators, ensembles, generators


def test_k1_closed_form_is_cos_power():
    assert generators.trig_Z11(4, 0.3, 0.3 + np.pi / 3) == pytest.approx(
        0.0625, rel=1e-14)
    rng = np.random.default_rng(1)
    for _ in range(25):
        q, p = rng.uniform(0, 2 * np.pi, size=2)
        if abs(math.sin(q - p)) < 1e-3:
            continue
        for N in (1, 3, 6):
            z = generators.analytic_generator([q], [p], N)
            assert z.imag == pytest.approx(0.0, abs=1e-12)
            assert z.real == pytest.approx(generators.trig_Z11(N, q, p),
                                           rel=1e-11, abs=1e-13)


def test_normalization_at_coincidence_limit():
    eps = 1e-5
    z1 = generators.analytic_generator([0.8 + eps], [0.8], 3)
    assert z1 == pytest.approx(1.0, abs=1e-8)
    z2 = generators.analytic_generator([0.7 + eps, 1.9 + eps], [0.7, 1.9], 3)
    assert z2 == pytest.approx(1.0, abs=1e-8)


def test_near_coincident_angles_rejected():
    with pytest.raises(generators.NearCoincidentError):
        generators.analytic_generator([0.5], [0.5], 3)
    with pytest.raises(generators.NearCoincidentError):
        generators.analytic_generator([0.5], [0.5 + np.pi], 3)
    with pytest.raises(generators.NearCoincidentError):
        generators.analytic_generator([0.5, 0.5], [1.0, 2.0], 3)
    with pytest.raises(ValueError):
        generators.analytic_generator([0.5, 1.0], [1.5], 3)


def test_mc_generator_matches_closed_form():
    qs, ps = [0.4], [1.3]
    exact = generators.analytic_generator(qs, ps, 3)
    val = generators.mc_generator(qs, ps, 3, 20_000, seed=9, streams_count=4)
    assert abs(val.mean - exact) < 4 * max(val.stderr, 1e-12)
    assert val.trials + val.skipped == 20_000
    assert val.extra["estimator"] == "mean"


def test_mc_generator_k2():
    qs, ps = [0.4, 1.0], [1.6, 2.3]
    exact = generators.analytic_generator(qs, ps, 2)
    val = generators.mc_generator(qs, ps, 2, 40_000, seed=10, streams_count=4)
    assert abs(val.mean - exact) < 4 * max(val.stderr, 1e-12)


def test_mc_generator_median_of_means():
    val = generators.mc_generator([0.4], [1.3], 2, 8_000, seed=11,
                                  streams_count=2, batch=1000,
                                  median_blocks=4)
    assert val.extra["estimator"] == "median_of_means"
    assert val.extra["blocks"] == 8
    exact = generators.analytic_generator([0.4], [1.3], 2)
    assert abs(val.mean - exact) < 6 * max(val.stderr, 1e-12)


def test_mc_generator_quaternion_class_runs():
    val = generators.mc_generator([0.4], [1.3], 2, 2_000, seed=12,
                                  streams_count=2, cls=ensembles.CII)
    assert np.isfinite(val.mean.real) and np.isfinite(val.mean.imag)


def test_mc_generator_validations():
    with pytest.raises(ValueError):
        generators.mc_generator([0.0], [1.0], 2, 10)  # q on a b() zero
    with pytest.raises(ValueError):
        generators.mc_generator([0.4, 0.5], [1.0], 2, 10)


@pytest.mark.parametrize("N", [1, 2, 4])
def test_fd_bridge_reproduces_c2(N):
    ps = [0.9, 1.7]
    got = generators.fd_correlator_from_Z(2, ps, N)
    assert got.imag == pytest.approx(0.0, abs=1e-8)
    assert got.real == pytest.approx(correlators.analytic_C2(N, *ps),
                                     abs=1e-6)


def test_fd_bridge_first_derivative_vanishes():
    got = generators.fd_correlator_from_Z(1, [1.1], 4)
    assert abs(got) < 1e-8


def test_fd_step_window():
    with pytest.raises(generators.StepSizeError):
        generators.fd_correlator_from_Z(2, [0.9, 1.7], 2, h=1e-6)
    with pytest.raises(generators.StepSizeError):
        generators.fd_correlator_from_Z(2, [0.9, 1.7], 2, h=0.5)


def test_pfaffian_two_by_two():
    m = np.array([[0.0, 2.5], [-2.5, 0.0]])
    assert generators.pfaffian(m) == pytest.approx(2.5)


def test_pfaffian_four_by_four_identity():
    rng = np.random.default_rng(3)
    a, b, c, d, e, f = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    m = np.array([[0, a, b, c],
                  [-a, 0, d, e],
                  [-b, -d, 0, f],
                  [-c, -e, -f, 0]])
    assert generators.pfaffian(m) == pytest.approx(a * f - b * e + c * d,
                                                   rel=1e-12)


@pytest.mark.parametrize("n", [2, 4, 8, 12])
def test_pfaffian_squares_to_determinant(n):
    rng = np.random.default_rng(n)
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    m = m - m.T
    pf = generators.pfaffian(m)
    det = np.linalg.det(m)
    assert pf ** 2 == pytest.approx(det, rel=1e-9)


def test_pfaffian_congruence_scaling():
    rng = np.random.default_rng(17)
    n = 6
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    m = m - m.T
    b = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    lhs = generators.pfaffian(b @ m @ b.T)
    rhs = np.linalg.det(b) * generators.pfaffian(m)
    assert lhs == pytest.approx(rhs, rel=1e-9)


def test_pfaffian_edge_cases():
    assert generators.pfaffian(np.zeros((4, 4))) == 0.0
    assert generators.pfaffian(np.zeros((3, 3))) == 0.0  # odd dimension
    assert generators.pfaffian(np.zeros((0, 0))) == 1.0
    with pytest.raises(ValueError):
        generators.pfaffian(np.ones((3, 3)))
    with pytest.raises(ValueError):
        generators.pfaffian(np.zeros((2, 3)))
