"""Topological invariant of the Kitaev superconducting chain.

The Bloch Hamiltonian in momentum space is H(k) = d_y(k) sigma_y +
d_z(k) sigma_z with

    d_y = Delta sin k,    d_z = mu + 2 t cos k,

which anticommutes with sigma_x (chiral symmetry). Rotating by the
Hadamard matrix (sigma_x + sigma_z)/sqrt(2) diagonalizes sigma_x and
puts H off-diagonal with entry

    h(k) = d_z(k) + i d_y(k),

so the topological invariant is the winding of h(k) about the origin
as k sweeps one Brillouin zone. That is exactly the 1x1 case of the
parametrized family K(k) = a(k) K_1 + b(k) K_2 handled elsewhere in
this package: with K_1 = K_2 = 1, a = mu + 2 t cos k and b = i Delta
sin k, the loop determinant equals h(k), and the same contour
quadrature of tr(K^{-1} K') computes the invariant. The phase diagram
is |W| = 1 for |mu| < 2|t| (with Delta != 0) and W = 0 outside.

The spectral gap min_k |h(k)| is evaluated in closed form: |h|^2
restricted to c = cos k is the quadratic (4t^2 - Delta^2) c^2 +
4 mu t c + (mu^2 + Delta^2), minimized exactly over [-1, 1].
"""

import math
from dataclasses import dataclass

import numpy as np

from windstat import winding
from windstat.ensembles import AIII, ChiralSample

__all__ = [
    "KitaevParams",
    "PhaseTransitionError",
    "d_vector",
    "bloch_hamiltonian",
    "chiral_offdiagonal",
    "dispersion_and_gap",
    "kitaev_loop",
    "kitaev_winding",
    "locate_flip",
]

#: gap below which the invariant is undefined and evaluation refuses
GAP_TOL = 1e-9


class PhaseTransitionError(ArithmeticError):
    """Spectral gap closed (or numerically closed); winding is undefined."""


@dataclass(frozen=True)
class KitaevParams:
    t: float
    mu: float
    delta: float


def d_vector(params, k):
    """Bloch vector (d_x, d_y, d_z) at momentum k (vectorized in k)."""
    k = np.asarray(k, dtype=float)
    dy = params.delta * np.sin(k)
    dz = params.mu + 2.0 * params.t * np.cos(k)
    return np.zeros_like(dy), dy, dz


def bloch_hamiltonian(params, k):
    """2x2 Bloch Hamiltonian d_y sigma_y + d_z sigma_z at scalar k."""
    _, dy, dz = d_vector(params, float(k))
    return np.array([[dz, -1j * dy], [1j * dy, -dz]])


def chiral_offdiagonal(params, k):
    """Off-diagonal entry h(k) = d_z + i d_y in the chiral basis."""
    _, dy, dz = d_vector(params, k)
    return dz + 1j * dy


@dataclass(frozen=True)
class Dispersion:
    k: np.ndarray
    energies: np.ndarray
    gap: float


def _exact_gap(params):
    t, mu, delta = params.t, params.mu, params.delta
    # |h|^2 as a quadratic in c = cos k on [-1, 1]
    qa = 4.0 * t * t - delta * delta
    qb = 4.0 * mu * t
    qc = mu * mu + delta * delta
    best = min(qa + qb + qc, qa - qb + qc)  # c = +1, c = -1
    if qa > 0.0:
        c_star = -qb / (2.0 * qa)
        if -1.0 <= c_star <= 1.0:
            best = min(best, qc - qb * qb / (4.0 * qa))
    return math.sqrt(max(best, 0.0))


def dispersion_and_gap(params, num=2001):
    """Band energy |h(k)| on a Brillouin-zone grid plus the exact gap.

    The gap comes from the closed-form quadratic minimum, not the grid,
    so it is exact even when the band minimum falls between grid points.
    """
    k = np.linspace(-math.pi, math.pi, num)
    energies = np.abs(chiral_offdiagonal(params, k))
    return Dispersion(k=k, energies=energies, gap=_exact_gap(params))


def kitaev_loop(params):
    """The chain as a 1x1 loop family: K(k) = a(k) + b(k), det K = h(k)."""
    t, mu, delta = params.t, params.mu, params.delta
    return winding.LoopFunctions(
        a=lambda k: mu + 2.0 * t * np.cos(k),
        b=lambda k: 1j * delta * np.sin(k),
        da=lambda k: -2.0 * t * np.sin(k),
        db=lambda k: 1j * delta * np.cos(k),
        name="kitaev",
        trig=False,
        count_axis=None,
    )


def kitaev_winding(params, grid_size=4096, tol=winding.QUANTIZATION_TOL):
    """Topological invariant W of the chain via the contour route.

    Raises PhaseTransitionError when the exact gap is at or below
    GAP_TOL: at a gap closing h(k) passes through the origin and the
    winding is genuinely undefined, not merely hard to compute.
    """
    gap = _exact_gap(params)
    if gap <= GAP_TOL:
        raise PhaseTransitionError(
            f"spectral gap {gap:.3e} at or below {GAP_TOL:.0e}; "
            "the chain is at a phase transition and W is undefined")
    one = np.eye(1, dtype=np.complex128)
    sample = ChiralSample(k1=one, k2=one.copy(), cls=AIII, N=1, stream_id=0)
    record = winding.winding_number_contour(
        sample, loop=kitaev_loop(params), grid_size=grid_size, tol=tol)
    return record.W


def locate_flip(t, delta, mu_lo, mu_hi, tol=1e-4):
    """Bisect in mu for the invariant flip between mu_lo and mu_hi.

    Endpoints must lie in distinct phases. A bisection point that lands
    on the transition itself (PhaseTransitionError) is returned directly
    as the boundary. Otherwise bisection narrows the bracket to tol and
    returns its midpoint.
    """
    w_lo = kitaev_winding(KitaevParams(t=t, mu=mu_lo, delta=delta))
    w_hi = kitaev_winding(KitaevParams(t=t, mu=mu_hi, delta=delta))
    if abs(w_lo) == abs(w_hi):
        raise ValueError(
            f"endpoints share |W| = {abs(w_lo)}; bracket a flip first")
    lo, hi = float(mu_lo), float(mu_hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        try:
            w_mid = kitaev_winding(KitaevParams(t=t, mu=mid, delta=delta))
        except PhaseTransitionError:
            return mid
        if abs(w_mid) == abs(w_lo):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
