"""Exact distribution of the loop winding number.

For the rotation-invariant spherical ensemble the N moduli |z_m| are
independent, each with an explicit law, so the half-plane occupation
count behind the winding number is a sum of independent (non-identical)
Bernoulli variables. Mode m succeeds with probability

    u_m(N, q^2) = I_s(m, N - m + 1),   s = q^2 / (1 + q^2),

(see specfun), the count M is Poisson-binomial over (u_1, ..., u_N), and
W = 2M - N on the support {-N, -N+2, ..., N}.

Two independent routes to the same PMF are kept side by side:

  * winding_pmf: the O(N^2) Poisson-binomial convolution (kernels),
  * r_direct: the defining symmetrized average over permutations, an
    O(N!) reference valid for small N, with P(M = m) = C(N, m) r(m).

Their agreement is asserted in the tests; neither is expressed through
the other.

The variance 4 sum u_m (1 - u_m) grows like 2 sqrt(N / pi) at q^2 = 1,
and the standardized PMF approaches a centered Gaussian; see
gaussian_limit_report.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from windstat import kernels, specfun

__all__ = [
    "WindingPMF",
    "inside_probabilities",
    "winding_pmf",
    "r_direct",
    "variance_ratio",
    "gaussian_limit_report",
    "total_variation",
]

#: permutation route is factorial-time; refuse beyond this
R_DIRECT_MAX_N = 8

#: tolerated drift of sum(probs) from 1 before renormalization is refused
NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True)
class WindingPMF:
    N: int
    q2: float
    support: np.ndarray
    probs: np.ndarray
    mean: float
    variance: float

    def prob(self, w):
        idx = np.searchsorted(self.support, w)
        if idx >= len(self.support) or self.support[idx] != w:
            raise ValueError(f"{w} is not in the support of W for N={self.N}")
        return float(self.probs[idx])


def inside_probabilities(N, q2=1.0):
    """Per-mode upper-half-plane probabilities u_m(N, q^2), m = 1..N."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return np.array([specfun.u_fn(m, N, q2) for m in range(1, N + 1)])


def winding_pmf(N, q2=1.0):
    """Exact PMF of W = 2M - N via the Poisson-binomial convolution."""
    u = inside_probabilities(N, q2)
    probs = np.asarray(kernels.poisson_binomial(u))
    total = probs.sum()
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise ArithmeticError(
            f"convolution mass drifted to {total!r}; refusing to renormalize")
    probs = probs / total
    support = np.arange(-N, N + 1, 2)
    mean = float(np.dot(support, probs))
    variance = float(np.dot((support - mean) ** 2, probs))
    return WindingPMF(N=N, q2=q2, support=support, probs=probs,
                      mean=mean, variance=variance)


def r_direct(N, m, q2=1.0):
    """Symmetrized permutation average r(m); P(M = m) = C(N, m) r(m).

    r(m) = (1/N!) sum_sigma prod_{j<=m} u_{sigma(j)} prod_{j>m} v_{sigma(j)}.
    Exact but O(N!); a reference for cross-checking winding_pmf, guarded
    to N <= 8.
    """
    if N > R_DIRECT_MAX_N:
        raise ValueError(f"permutation route is O(N!); use N <= {R_DIRECT_MAX_N}")
    if not 0 <= m <= N:
        raise ValueError(f"m must be in 0..{N}, got {m}")
    u = inside_probabilities(N, q2)
    v = np.array([specfun.v_fn(k, N, q2) for k in range(1, N + 1)])
    total = 0.0
    for perm in itertools.permutations(range(N)):
        term = 1.0
        for j, idx in enumerate(perm):
            term *= u[idx] if j < m else v[idx]
        total += term
    return total / math.factorial(N)


def variance_ratio(N, q2=1.0):
    """Var(W) divided by its large-N scale 2 sqrt(N / pi)."""
    return winding_pmf(N, q2).variance / (2.0 * math.sqrt(N / math.pi))


def gaussian_limit_report(N_list, q2=1.0):
    """Convergence report rows for the central limit of W.

    Each row holds N, the exact variance, its ratio to 2 sqrt(N / pi),
    and the sup distance between the standardized PMF and the Gaussian
    mass approximation (2 / sigma) phi(w / sigma) on the support (step-2
    lattice, so each point carries width 2).
    """
    rows = []
    for N in N_list:
        pmf = winding_pmf(N, q2)
        sigma = math.sqrt(pmf.variance)
        gauss = (2.0 / sigma) * np.exp(-0.5 * (pmf.support / sigma) ** 2) \
            / math.sqrt(2.0 * math.pi)
        rows.append({
            "N": N,
            "variance": pmf.variance,
            "variance_ratio": pmf.variance / (2.0 * math.sqrt(N / math.pi)),
            "sup_distance": float(np.max(np.abs(pmf.probs - gauss))),
        })
    return rows


def total_variation(pmf, samples):
    """TV distance between the exact PMF and an empirical sample of W."""
    samples = np.asarray(samples)
    if samples.size == 0:
        raise ValueError("empty sample")
    outside = ~np.isin(samples, pmf.support)
    if np.any(outside):
        bad = samples[outside][0]
        raise ValueError(f"sample value {bad} outside the support for N={pmf.N}")
    counts = np.array([np.sum(samples == w) for w in pmf.support], dtype=float)
    emp = counts / samples.size
    return 0.5 * float(np.sum(np.abs(emp - pmf.probs)))
