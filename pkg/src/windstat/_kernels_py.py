"""Pure-Python/numpy implementations of the hot kernels.

These are the reference implementations; windstat.kernels substitutes the
compiled twins from _kernels_cy when that extension is importable. Both
backends must agree to near machine precision (see tests/test_kernels.py).
"""

import math

import numpy as np

__all__ = ["betainc_cf", "trace_density_grid", "poisson_binomial"]

# Lentz continued-fraction parameters. 200 iterations is far beyond what
# a,b ~ 2000 needs (convergence is geometric after ~sqrt(max(a,b)) terms).
_MAX_ITER = 500
_EPS = 1e-16
_TINY = 1e-300


def _beta_cf(a, b, x):
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise RuntimeError(f"incomplete beta continued fraction failed to converge "
                       f"(a={a}, b={b}, x={x})")


def betainc_cf(a, b, x):
    """Regularized incomplete beta function I_x(a, b).

    Continued-fraction evaluation with the symmetry switch at
    x > (a+1)/(a+b+2), all prefactors in log space.
    """
    if a <= 0.0 or b <= 0.0:
        raise ValueError(f"betainc_cf requires a, b > 0, got a={a}, b={b}")
    if x < 0.0 or x > 1.0:
        raise ValueError(f"betainc_cf requires 0 <= x <= 1, got x={x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def trace_density_grid(k1, k2, a, b, da, db, block=8192):
    """tr(K(p)^{-1} K'(p)) on a grid, K = a*K1 + b*K2, K' = da*K1 + db*K2.

    a, b, da, db are equal-length 1-D arrays of (possibly complex) loop
    coefficients sampled on the grid; returns a complex array of traces.
    """
    k1 = np.asarray(k1, dtype=np.complex128)
    k2 = np.asarray(k2, dtype=np.complex128)
    a = np.asarray(a)
    b = np.asarray(b)
    da = np.asarray(da)
    db = np.asarray(db)
    m = a.shape[0]
    out = np.empty(m, dtype=np.complex128)
    for start in range(0, m, block):
        sl = slice(start, min(start + block, m))
        kk = a[sl, None, None] * k1 + b[sl, None, None] * k2
        kp = da[sl, None, None] * k1 + db[sl, None, None] * k2
        x = np.linalg.solve(kk, kp)
        out[sl] = np.einsum("mii->m", x)
    return out


def poisson_binomial(probs):
    """PMF of a sum of independent Bernoulli(p_m) variables.

    O(N^2) convolution in ascending order; probs is a 1-D array of success
    probabilities, the result has length len(probs)+1 and sums to 1.
    """
    probs = np.asarray(probs, dtype=np.float64)
    if probs.size and (probs.min() < 0.0 or probs.max() > 1.0):
        raise ValueError("success probabilities must lie in [0, 1]")
    pmf = np.zeros(probs.size + 1)
    pmf[0] = 1.0
    for j, p in enumerate(probs):
        hi = j + 1
        pmf[1:hi + 1] = pmf[1:hi + 1] * (1.0 - p) + pmf[:hi] * p
        pmf[0] *= 1.0 - p
    return pmf
