"""Moment generating function of the winding density and its bridges.

The object computed here is the ratio average

    Z(q, p) = < prod_m det K(q_m) / det K(p_m) >,

a function of k "numerator" angles q and k "denominator" angles p with
Z(p, p) = 1. Correlators follow by differentiation:

    C_k(p_1, ..., p_k) = d^k Z / (dp_1 ... dp_k) |_{q = p},

implemented as fd_correlator_from_Z with offset stencils (the stencil
never evaluates on the singular coincidence set q = p itself).

Two routes to Z are provided and cross-checked in the tests:

  * mc_generator: Monte Carlo over ensemble draws in spectrum form,
    det K(q)/det K(p) = (b(q)/b(p))^side prod_n (kappa(q) + z_n) /
    (kappa(p) + z_n), so no determinants are formed;
  * analytic_generator: the closed determinant ratio with entries built
    from the loop coefficient vector v(p) = (a(p), b(p)),

        S_mn = i (b(q_m) a(p_n) - a(q_m) b(p_n)),
        Z = det[ S^{-1}_mn ((v^+(q_m) v(p_n)) / (v^+(q_m) v(q_m)))^N ]
            / det[ S^{-1}_mn ],

    which for the trig loop at k = 1 collapses to cos^N(q - p).

A reference Pfaffian (unitary Householder reduction to tridiagonal
form) supports the quaternion symmetry class, where determinants of
the skew kernels factor as squares: Pf(A)^2 = det(A).
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from windstat import ensembles, streams
from windstat.stats import EstimatorAccumulator
from windstat.winding import trig_loop

__all__ = [
    "GeneratorValue",
    "NearCoincidentError",
    "StepSizeError",
    "mc_generator",
    "analytic_generator",
    "trig_Z11",
    "fd_correlator_from_Z",
    "pfaffian",
]

logger = logging.getLogger(__name__)

#: log10 of the denominator magnitude below which a draw is skipped
LOG10_UNDERFLOW = -280.0

#: |sin| threshold treating two angles as coincident mod pi
SIN_TOL = 1e-10

#: finite-difference step bounds (truncation above, cancellation below)
H_MIN, H_MAX = 1e-4, 0.1

SKIP_RATE_WARN = 1e-3


class NearCoincidentError(ValueError):
    """Angles coincide mod pi where the determinant entries diverge.

    Separate the q angles from the p angles (and from each other); the
    derivative bridge uses offset stencils precisely to stay off the
    coincidence set.
    """


class StepSizeError(ValueError):
    """Finite-difference step outside the stable window."""


@dataclass
class GeneratorValue:
    qs: tuple
    ps: tuple
    mean: complex
    stderr: float
    trials: int
    skipped: int
    status: str = "ok"
    extra: dict = field(default_factory=dict)


def _ratio_batch(zbatch, loop, qs, ps, side):
    """Per-draw det-ratio products in spectrum form for a batch of rows."""
    vals = np.ones(zbatch.shape[0], dtype=np.complex128)
    log10_den = np.zeros(zbatch.shape[0])
    for q, p in zip(qs, ps):
        bq, bp = loop.b(q), loop.b(p)
        num = loop.a(q) / bq + zbatch
        den = loop.a(p) / bp + zbatch
        log10_den += (np.sum(np.log10(np.abs(den)), axis=1)
                      + side * math.log10(abs(bp)))
        vals *= (bq / bp) ** side * np.prod(num, axis=1) / np.prod(den, axis=1)
    keep = log10_den > LOG10_UNDERFLOW
    return vals, keep


def mc_generator(qs, ps, N, trials, seed=0, streams_count=None,
                 cls=ensembles.AIII, loop=None, batch=4096,
                 median_blocks=0):
    """Monte Carlo estimate of Z(q, p) over fresh ensemble draws.

    Draws whose denominator magnitude underflows (log10 below
    LOG10_UNDERFLOW, an eigenvalue essentially on a denominator pole)
    are skipped and counted. With median_blocks > 0 the estimate is the
    median of that many per-stream block means instead of the plain
    mean, trading a small bias for resistance to the heavy tail; the
    default is the plain mean, which is what the correlator identities
    assume.
    """
    if loop is None:
        loop = trig_loop()
    qs = tuple(float(q) for q in np.atleast_1d(qs))
    ps = tuple(float(p) for p in np.atleast_1d(ps))
    if len(qs) != len(ps) or not qs:
        raise ValueError("qs and ps must be non-empty and equal length")
    for p in list(qs) + list(ps):
        if abs(loop.b(p)) < 1e-6:
            raise ValueError(f"angle {p} sits on a b(p) zero")
    side = cls.block_side(N)

    def worker(rng, n_trials, stream_id):
        acc = EstimatorAccumulator()
        block_means = []
        skipped = 0
        done = 0
        while done < n_trials:
            m = min(batch, n_trials - done)
            specs, _ = ensembles.draw_spectra(N, cls, m, rng,
                                              collect=lambda s: s.z)
            zb = np.array(specs)
            vals, keep = _ratio_batch(zb, loop, qs, ps, side)
            skipped += int(np.sum(~keep))
            kept = vals[keep]
            acc.add_batch(kept)
            if median_blocks > 0 and kept.size:
                block_means.append(complex(np.mean(kept)))
            done += m
        return acc, skipped, block_means

    def merge(a, b):
        a[0].merge(b[0])
        return (a[0], a[1] + b[1], a[2] + b[2])

    acc, skipped, block_means = streams.run_partitioned(
        worker, trials, seed, streams=streams_count, merge=merge)
    status = "ok"
    if skipped > SKIP_RATE_WARN * trials:
        status = "high-skip-rate"
        logger.warning("underflow skip rate %.2e above %.0e",
                       skipped / trials, SKIP_RATE_WARN)
    extra = {"estimator": "mean"}
    mean, stderr = acc.mean, acc.stderr_real()
    if median_blocks > 0:
        re = np.median([b.real for b in block_means])
        im = np.median([b.imag for b in block_means])
        mean = complex(re, im)
        dev = np.abs(np.asarray(block_means) - mean)
        stderr = 1.4826 * float(np.median(dev)) / math.sqrt(len(block_means))
        extra = {"estimator": "median_of_means", "blocks": len(block_means)}
    return GeneratorValue(qs=qs, ps=ps, mean=mean, stderr=stderr,
                          trials=acc.count, skipped=skipped, status=status,
                          extra=extra)


def _check_separations(qs, ps):
    for i, x in enumerate(qs):
        for j, y in enumerate(ps):
            if abs(math.sin(x - y)) < SIN_TOL:
                raise NearCoincidentError(
                    f"q[{i}]={x} and p[{j}]={y} coincide mod pi")
    for name, arr in (("q", qs), ("p", ps)):
        for i in range(len(arr)):
            for j in range(i + 1, len(arr)):
                if abs(math.sin(arr[i] - arr[j])) < SIN_TOL:
                    raise NearCoincidentError(
                        f"{name}[{i}] and {name}[{j}] coincide mod pi; "
                        "perturb the duplicated angle")


def analytic_generator(qs, ps, N, loop=None):
    """Closed-form Z(q, p) as a ratio of k x k determinants."""
    if loop is None:
        loop = trig_loop()
    qs = np.atleast_1d(np.asarray(qs, dtype=float))
    ps = np.atleast_1d(np.asarray(ps, dtype=float))
    if qs.shape != ps.shape or qs.size == 0:
        raise ValueError("qs and ps must be non-empty and equal length")
    _check_separations(qs, ps)
    aq, bq = loop.a(qs), loop.b(qs)
    ap, bp = loop.a(ps), loop.b(ps)
    s = 1j * (np.outer(bq, ap) - np.outer(aq, bp))
    overlap = (np.outer(np.conj(aq), ap) + np.outer(np.conj(bq), bp))
    norm = (np.abs(aq) ** 2 + np.abs(bq) ** 2)[:, None]
    den = 1.0 / s
    num = den * (overlap / norm) ** N
    sign_d, logdet_d = np.linalg.slogdet(den)
    if not np.isfinite(logdet_d) or sign_d == 0:
        raise NearCoincidentError(
            "denominator determinant vanished; angles too close mod pi")
    sign_n, logdet_n = np.linalg.slogdet(num)
    if sign_n == 0:
        return 0.0 + 0.0j
    return complex(sign_n / sign_d * np.exp(logdet_n - logdet_d))


def trig_Z11(N, q, p):
    """k = 1 closed form for the trig loop: cos^N(q - p)."""
    return math.cos(q - p) ** N


# f'(x) ~ [f(x-2h) - 8 f(x-h) + 8 f(x+h) - f(x+2h)] / (12 h)
_STENCIL4 = ((-2.0, 1.0 / 12.0), (-1.0, -8.0 / 12.0),
             (1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0))


def _fd(k, ps, N, loop, h):
    def z_at(offsets):
        shifted = [p + o * h for p, o in zip(ps, offsets)]
        return analytic_generator(ps, shifted, N, loop=loop)

    total = 0.0 + 0.0j
    idx = [0] * k
    while True:
        coeff = 1.0
        offsets = []
        for j in idx:
            o, c = _STENCIL4[j]
            coeff *= c
            offsets.append(o)
        total += coeff * z_at(offsets)
        for pos in range(k):
            idx[pos] += 1
            if idx[pos] < len(_STENCIL4):
                break
            idx[pos] = 0
        else:
            break
    return total / (h ** k)


def fd_correlator_from_Z(k, ps, N, loop=None, h=0.01):
    """C_k from Z by offset finite differences at the coincidence point.

    Mixed k-th derivative of Z(q, p) in the p angles at q = p, built
    from a tensor product of 4-point central stencils (the center point
    is never evaluated) plus one Richardson step combining h and h/2.
    With the default h the residual error sits far below 1e-6 for the
    sizes this package targets.
    """
    if loop is None:
        loop = trig_loop()
    if not H_MIN <= h <= H_MAX:
        raise StepSizeError(
            f"h={h} outside [{H_MIN}, {H_MAX}]: larger steps lose the "
            "truncation order, smaller ones lose digits to cancellation")
    ps = [float(p) for p in np.atleast_1d(ps)]
    if len(ps) != k:
        raise ValueError(f"expected {k} angles, got {len(ps)}")
    d_h = _fd(k, ps, N, loop, h)
    d_h2 = _fd(k, ps, N, loop, h / 2.0)
    return (16.0 * d_h2 - d_h) / 15.0


def pfaffian(a, atol=1e-12):
    """Pfaffian of a complex skew-symmetric matrix.

    Unitary Householder congruences H A H^T (H Hermitian unitary, so
    H^T = conj(H)) reduce A to skew tridiagonal form T; each reflection
    has det -1, and Pf(B A B^T) = det(B) Pf(A), so

        Pf(A) = (-1)^{#reflections} * prod_i T[2i, 2i+1].

    Unitary congruences keep the reduction well conditioned at every
    step; sizes here are small, so the matrices are updated explicitly.
    Odd dimension gives 0; a vanishing reduction column gives 0.
    """
    a = np.array(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    scale = max(np.max(np.abs(a)), 1.0)
    if np.max(np.abs(a + a.T)) > atol * scale:
        raise ValueError("matrix is not skew-symmetric within tolerance")
    if n % 2:
        return 0.0 + 0.0j
    sign = 1.0
    for j in range(n - 2):
        x = a[j + 1:, j].copy()
        nx = np.linalg.norm(x)
        if nx == 0.0:
            return 0.0 + 0.0j
        if np.linalg.norm(x[1:]) < 1e-300:
            continue
        phase = x[0] / abs(x[0]) if abs(x[0]) > 0.0 else 1.0
        v = x.copy()
        v[0] += phase * nx
        hb = np.eye(len(x), dtype=np.complex128) \
            - 2.0 * np.outer(v, np.conj(v)) / np.vdot(v, v).real
        a[j + 1:, :] = hb @ a[j + 1:, :]
        a[:, j + 1:] = a[:, j + 1:] @ np.conj(hb)
        sign = -sign
    pf = 1.0 + 0.0j
    for i in range(0, n, 2):
        pf *= a[i, i + 1]
    return sign * pf
