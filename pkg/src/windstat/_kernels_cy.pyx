# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the hot kernels in _kernels_py.

Same contracts as the pure backend; selected automatically by
windstat.kernels when this module imports.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, lgamma, log, log1p
from libc.stdlib cimport free, malloc

cnp.import_array()

DEF MAX_ITER = 500
cdef double EPS = 1e-16
cdef double TINY = 1e-300


cdef double _beta_cf(double a, double b, double x) except -1.0:
    cdef double qab = a + b
    cdef double qap = a + 1.0
    cdef double qam = a - 1.0
    cdef double c = 1.0
    cdef double d = 1.0 - qab * x / qap
    cdef double h, aa, delta
    cdef int m, m2
    if d < TINY and d > -TINY:
        d = TINY
    d = 1.0 / d
    h = d
    for m in range(1, MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if d < TINY and d > -TINY:
            d = TINY
        c = 1.0 + aa / c
        if c < TINY and c > -TINY:
            c = TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if d < TINY and d > -TINY:
            d = TINY
        c = 1.0 + aa / c
        if c < TINY and c > -TINY:
            c = TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if delta - 1.0 < EPS and delta - 1.0 > -EPS:
            return h
    raise RuntimeError("incomplete beta continued fraction failed to converge")


def betainc_cf(double a, double b, double x):
    """Regularized incomplete beta I_x(a, b); see the pure twin for docs."""
    cdef double log_front, front
    if a <= 0.0 or b <= 0.0:
        raise ValueError(f"betainc_cf requires a, b > 0, got a={a}, b={b}")
    if x < 0.0 or x > 1.0:
        raise ValueError(f"betainc_cf requires 0 <= x <= 1, got x={x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_front = (lgamma(a + b) - lgamma(a) - lgamma(b)
                 + a * log(x) + b * log1p(-x))
    front = exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


cdef int _lu_trace(double complex* kk, double complex* kp, int n,
                   double complex* out) nogil:
    """LU with partial pivoting of kk, then tr(kk^{-1} kp) via n solves.

    kk and kp are n*n row-major scratch buffers (overwritten). Returns -1
    on an exactly singular pivot, else 0.
    """
    cdef int i, j, k, piv
    cdef double best, mag
    cdef double complex tmp, factor, acc, tr
    # in-place LU factorization with row swaps applied to both matrices
    for k in range(n):
        piv = k
        best = kk[k * n + k].real * kk[k * n + k].real \
            + kk[k * n + k].imag * kk[k * n + k].imag
        for i in range(k + 1, n):
            mag = kk[i * n + k].real * kk[i * n + k].real \
                + kk[i * n + k].imag * kk[i * n + k].imag
            if mag > best:
                best = mag
                piv = i
        if best == 0.0:
            return -1
        if piv != k:
            for j in range(n):
                tmp = kk[k * n + j]
                kk[k * n + j] = kk[piv * n + j]
                kk[piv * n + j] = tmp
                tmp = kp[k * n + j]
                kp[k * n + j] = kp[piv * n + j]
                kp[piv * n + j] = tmp
        for i in range(k + 1, n):
            factor = kk[i * n + k] / kk[k * n + k]
            kk[i * n + k] = factor
            for j in range(k + 1, n):
                kk[i * n + j] = kk[i * n + j] - factor * kk[k * n + j]
    # solve kk * X = kp column by column, accumulating only diag(X)
    tr = 0
    for j in range(n):
        # forward substitution with the stored multipliers (unit lower part)
        for k in range(n):
            acc = kp[k * n + j]
            for i in range(k):
                acc = acc - kk[k * n + i] * kp[i * n + j]
            kp[k * n + j] = acc
        # back substitution
        for k in range(n - 1, -1, -1):
            acc = kp[k * n + j]
            for i in range(k + 1, n):
                acc = acc - kk[k * n + i] * kp[i * n + j]
            kp[k * n + j] = acc / kk[k * n + k]
        tr = tr + kp[j * n + j]
    out[0] = tr
    return 0


def trace_density_grid(k1, k2, a, b, da, db, block=8192):
    """tr(K(p)^{-1} K'(p)) over a coefficient grid; see the pure twin."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] k1c = \
        np.ascontiguousarray(k1, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] k2c = \
        np.ascontiguousarray(k2, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] ac = \
        np.ascontiguousarray(a, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] bc = \
        np.ascontiguousarray(b, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] dac = \
        np.ascontiguousarray(da, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] dbc = \
        np.ascontiguousarray(db, dtype=np.complex128)
    cdef int n = k1c.shape[0]
    cdef Py_ssize_t m = ac.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = \
        np.empty(m, dtype=np.complex128)
    cdef double complex* kk = <double complex*> malloc(n * n * sizeof(double complex))
    cdef double complex* kp = <double complex*> malloc(n * n * sizeof(double complex))
    cdef Py_ssize_t g
    cdef int i, j, bad
    cdef double complex av, bv, dav, dbv, tr
    if kk == NULL or kp == NULL:
        free(kk)
        free(kp)
        raise MemoryError
    bad = 0
    with nogil:
        for g in range(m):
            av = ac[g]
            bv = bc[g]
            dav = dac[g]
            dbv = dbc[g]
            for i in range(n):
                for j in range(n):
                    kk[i * n + j] = av * k1c[i, j] + bv * k2c[i, j]
                    kp[i * n + j] = dav * k1c[i, j] + dbv * k2c[i, j]
            if _lu_trace(kk, kp, n, &tr) != 0:
                bad = 1
                break
            out[g] = tr
    free(kk)
    free(kp)
    if bad:
        raise np.linalg.LinAlgError("singular loop matrix on the grid")
    return out


def poisson_binomial(probs):
    """Poisson-binomial PMF by ascending convolution; see the pure twin."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pc = \
        np.ascontiguousarray(probs, dtype=np.float64)
    cdef Py_ssize_t n = pc.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pmf = np.zeros(n + 1)
    cdef Py_ssize_t j, i
    cdef double p
    for j in range(n):
        if pc[j] < 0.0 or pc[j] > 1.0:
            raise ValueError("success probabilities must lie in [0, 1]")
    pmf[0] = 1.0
    for j in range(n):
        p = pc[j]
        for i in range(j + 1, 0, -1):
            pmf[i] = pmf[i] * (1.0 - p) + pmf[i - 1] * p
        pmf[0] *= 1.0 - p
    return pmf
