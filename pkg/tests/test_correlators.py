"""Density correlators: closed forms, estimators, and unfolding limits.

The load-bearing oracle here is the quadrature check of the shift-average
estimator: its closed form is compared per draw against a direct numeric
average of w(p1 + phi) w(p2 + phi) over the shift angle, built from the
independently tested spectral density.
"""

import math
import warnings

import numpy as np
import pytest
import scipy.special

from windstat import correlators, ensembles, winding
from windstat.ensembles import AIII, SphericalSpectrum
from windstat.streams import substream


def test_analytic_c2_equals_displayed_ratio():
    # the geometric sum must agree with the ratio form where the latter
    # is well conditioned
    for N in (1, 2, 4, 8):
        for d in (0.4, 1.0, 2.2):
            ratio = -(1 - math.cos(d) ** (2 * N)) / (1 - math.cos(d) ** 2)
            assert correlators.analytic_C2_delta(N, d) == pytest.approx(
                ratio, rel=1e-14)


def test_analytic_c2_special_values():
    rng = np.random.default_rng(2)
    for _ in range(20):
        p1, p2 = rng.uniform(0, 2 * np.pi, size=2)
        if abs(math.sin(p1 - p2)) < 1e-3:
            continue
        assert correlators.analytic_C2(1, p1, p2) == pytest.approx(-1.0)
    # perpendicular separation keeps only the j = 0 term
    assert correlators.analytic_C2(6, 0.3, 0.3 + np.pi / 2) == pytest.approx(-1.0)


def test_analytic_c2_diagonal_policy():
    with pytest.warns(correlators.DiagonalLimitWarning):
        val = correlators.analytic_C2(5, 1.1, 1.1)
    assert val == -5.0
    with pytest.warns(correlators.DiagonalLimitWarning):
        assert correlators.analytic_C2(3, 0.4, 0.4 + np.pi) == -3.0
    # the geometric sum is continuous into the diagonal
    assert correlators.analytic_C2(5, 1.1, 1.1 + 1e-9) == pytest.approx(
        -5.0, abs=1e-6)


def _quadrature_shift_average(z, p1, p2, grid=4096):
    spec = SphericalSpectrum(z=z, cls=AIII, N=z.size)
    loop = winding.trig_loop()
    phis = np.arange(grid) * (2 * np.pi / grid)
    vals = np.empty(grid, dtype=np.complex128)
    for i, phi in enumerate(phis):
        w1 = winding.winding_density_spectral(spec, loop, p1 + phi)
        w2 = winding.winding_density_spectral(spec, loop, p2 + phi)
        vals[i] = w1 * w2
    return vals.mean()


def test_shift_average_closed_form_vs_quadrature():
    rng = substream(20, 0)
    p1, p2 = 1.1, 0.3
    for _ in range(5):
        (z,), _ = ensembles.draw_spectra(3, AIII, 1, rng,
                                         collect=lambda s: s.z)
        closed = correlators._phase_averaged_batch(z[None, :], p1 - p2)[0]
        quad = _quadrature_shift_average(z, p1, p2)
        assert abs(closed - quad) < 1e-9


def test_shift_average_single_density():
    rng = substream(21, 0)
    (z,), _ = ensembles.draw_spectra(4, AIII, 1, rng, collect=lambda s: s.z)
    spec = SphericalSpectrum(z=z, cls=AIII, N=4)
    loop = winding.trig_loop()
    grid = 4096
    phis = np.arange(grid) * (2 * np.pi / grid)
    quad = np.mean([winding.winding_density_spectral(spec, loop, 0.7 + phi)
                    for phi in phis])
    single = correlators._phase_averaged_single(z[None, :])[0]
    assert abs(single - quad) < 1e-9
    w = winding.winding_number_count(spec, loop)
    assert single == 1j * w


def test_mc_matches_closed_form_small_run():
    pts = [(np.pi - 1.2) / 2, (np.pi + 1.2) / 2]
    exact = correlators.analytic_C2(2, *pts)
    plain = correlators.mc_correlator(2, pts, 2, 30_000, seed=5,
                                      streams_count=4)
    assert abs(plain.mean.real - exact) < 4 * plain.stderr
    averaged = correlators.mc_correlator(2, pts, 2, 30_000, seed=5,
                                         streams_count=4,
                                         estimator="phase_averaged")
    assert abs(averaged.mean.real - exact) < 4 * averaged.stderr
    assert averaged.stderr < plain.stderr


def test_mc_c1_consistent_with_zero():
    est = correlators.mc_correlator(1, [0.8], 3, 20_000, seed=6,
                                    streams_count=4)
    assert abs(est.mean) < 5 * math.hypot(est.stderr, est.stderr_imag)
    assert est.trials + est.skipped == 20_000


def test_mc_profile_shares_draws():
    prof = correlators.mc_c2_profile([0.5, 2.0], 3, 5_000, seed=7,
                                     streams_count=2,
                                     estimator="phase_averaged")
    assert len(prof) == 2
    for est, d in zip(prof, (0.5, 2.0)):
        assert est.extra["delta"] == d
        exact = correlators.analytic_C2(3, *est.points)
        assert abs(est.mean.real - exact) < 5 * est.stderr


def test_mc_validations():
    with pytest.raises(ValueError):
        correlators.mc_correlator(2, [0.7, 0.7], 2, 10)
    with pytest.raises(ValueError):
        correlators.mc_correlator(1, [0.0], 2, 10)  # on the b(p) zero
    with pytest.raises(ValueError):
        correlators.mc_correlator(2, [0.5], 2, 10)
    with pytest.raises(ValueError):
        correlators.mc_correlator(1, [0.5], 2, 10, estimator="bogus")
    with pytest.raises(ValueError):
        correlators.mc_correlator(3, [0.4, 1.0, 1.6], 2, 10,
                                  estimator="phase_averaged")


def test_skip_accounting_flags_unhealthy_runs():
    est = correlators.mc_correlator(1, [0.9], 2, 200, seed=8,
                                    streams_count=1, skip_tol=10.0)
    assert est.skipped > 0
    assert est.status == "high-skip-rate"


def test_l_entry_against_scipy():
    N = 4
    for q in (0.5, 1.0, 2.0):
        s = q * q / (1.0 + q * q)
        for n in range(1, N + 1):
            for m in range(1, N + 1):
                u = scipy.special.betainc(m, N - m + 1, s)
                branch = u if m >= n else -(1.0 - u)
                ref = ((-1.0) ** (m - n) * math.pi / q ** (m - n + 1)
                       * scipy.special.beta(m, N - m + 1) * branch)
                assert correlators.L_entry(n, m, q, N) == pytest.approx(
                    ref, rel=1e-12, abs=1e-15)


def test_l_entry_validation():
    with pytest.raises(ValueError):
        correlators.L_entry(0, 1, 1.0, 3)
    with pytest.raises(ValueError):
        correlators.L_entry(1, 4, 1.0, 3)
    with pytest.raises(ValueError):
        correlators.L_entry(1, 1, 0.0, 3)


def test_unfolded_c2_definition():
    for N, alpha, psi in ((1, 0.5, 0.7), (6, 1 / 6, 2.0), (20, 0.5, 1.3)):
        direct = N ** (-2 * alpha) * float(
            correlators.analytic_C2_delta(N, psi / N ** alpha))
        assert correlators.unfolded_C2(N, alpha, psi, 0.0) == pytest.approx(
            direct, rel=1e-14)
    assert correlators.unfolded_C2(1, 0.5, 0.7, 0.0) == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        correlators.unfolded_C2(4, 0.5, 1.0, 1.0)
    with pytest.raises(ValueError):
        correlators.unfolded_C2(4, -0.5, 1.0, 0.0)


def test_f2_limit_regimes():
    assert correlators.f2_limit(0.25, 2.0, 0.0) == -0.25
    assert correlators.f2_limit(0.5, 2.0, 0.0) == pytest.approx(
        math.expm1(-4.0) / 4.0, rel=1e-15)
    assert correlators.f2_limit(0.75, 2.0, 0.0) == 0.0
    # expm1 keeps the small-separation limit finite and accurate
    assert correlators.f2_limit(0.5, 1e-8, 0.0) == pytest.approx(-1.0,
                                                                 abs=1e-8)
    with pytest.raises(ValueError):
        correlators.f2_limit(0.5, 1.0, 1.0)


def test_sup_distance_clipping():
    clipped = correlators.unfolding_sup_distance(5, 1 / 6)
    raw = correlators.unfolding_sup_distance(5, 1 / 6,
                                             clip_to_injective=False)
    assert clipped <= raw
    seq = [correlators.unfolding_sup_distance(n, 1 / 6) for n in (5, 10, 20)]
    assert seq[0] > seq[1] > seq[2]
    with pytest.raises(ValueError):
        correlators.unfolding_sup_distance(1, 1 / 6, delta_lo=2.0)
