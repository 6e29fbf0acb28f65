"""k-point correlators of the winding number density.

Monte Carlo estimation of C_k(p_1, ..., p_k) = <w(p_1) ... w(p_k)> over
ensemble draws, the exact closed forms for k <= 2, the determinant-entry
function L, and the large-N unfolding limits.

Closed forms (trig loop, beta = 2):

    C_1(p) = 0
    C_2(p1, p2) = -(1 - cos^{2N} D) / (1 - cos^2 D),      D = p1 - p2.

C_2 is evaluated as the equivalent geometric sum

    C_2 = -sum_{j=0}^{N-1} cos^{2j} D,

which is the series expansion of the displayed ratio, exact for every D
(including the diagonal limit -N as D -> 0) and free of the catastrophic
cancellation the ratio suffers near cos D -> +-1.

Monte Carlo estimators
----------------------
The default "product" estimator averages the plain per-draw product of
spectral densities w(p_j). Its second moment diverges logarithmically
(w has near-poles where an eigenvalue approaches -kappa(p)), so a
variance-reduced "phase_averaged" estimator is also provided for k <= 2.
It exploits the exact rotation invariance of the spherical ensemble under
the loop shift p -> p + phi: per draw, the shift average

    g = (1/2pi) int_0^{2pi} w(p1 + phi) w(p2 + phi) dphi

has the same expectation as the plain product (the ensemble law is
invariant under the shift) but far smaller variance, and it has a closed
form. Writing each density as a sum over Cayley-transformed eigenvalues
u_n = (z_n - i)/(z_n + i),

    w(p) = sum_n i (e^{2ip} + u_n) / (e^{2ip} - u_n),

the phi-average of a product term is a contour integral over
zeta = e^{2i phi} with simple poles at zeta = 0 and, when |u| < 1 (i.e.
Im z > 0), at the rotated Cayley points. Collecting residues, with
r = e^{2i(p1 - p2)} and S_nm = (u_n + r u_m)/(u_n - r u_m):

    g = -side^2  - 2 * sum_{Im z_n > 0, Im z_m <= 0} S_nm
                 + 2 * sum_{Im z_n <= 0, Im z_m > 0} S_nm,

where side is the number of eigenvalues. Each diagonal term integrates
to exactly -1 (the double pole carries no residue), and for k = 1 the
same calculation gives the shift average i*(2 * #{Im z > 0} - side), i.e. i times
the winding number. The closed form is verified against numeric
phi-quadrature in the tests.
"""

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from windstat import ensembles, specfun, streams
from windstat.stats import EstimatorAccumulator
from windstat.winding import trig_loop

__all__ = [
    "CorrelatorEstimate",
    "DiagonalLimitWarning",
    "mc_correlator",
    "mc_c2_profile",
    "analytic_C2",
    "analytic_C2_delta",
    "L_entry",
    "unfolded_C2",
    "f2_limit",
    "unfolding_sup_distance",
]

logger = logging.getLogger(__name__)

#: pole-proximity guard: draws with min_n |kappa(p) + z_n| below this are
#: skipped and counted rather than allowed to dominate the average
SKIP_TOL = 1e-9

#: minimum |b(p)| for Monte Carlo evaluation points
B_MARGIN = 1e-3

#: skip-rate threshold above which an estimate is flagged
SKIP_RATE_WARN = 1e-3


class DiagonalLimitWarning(UserWarning):
    """Closed-form correlator evaluated at coincident points (limit value)."""


@dataclass
class CorrelatorEstimate:
    points: tuple
    mean: complex
    stderr: float
    trials: int
    skipped: int
    status: str = "ok"
    stderr_imag: float = 0.0
    extra: dict = field(default_factory=dict)


def _check_points(loop, points):
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if abs(math.remainder(pts[i] - pts[j], 2.0 * math.pi)) < 1e-12:
                raise ValueError(f"points must be pairwise distinct, got {points}")
    if np.min(np.abs(loop.b(pts))) < B_MARGIN:
        raise ValueError(f"points must avoid b(p) = 0 by margin {B_MARGIN}")
    return pts


def _product_batch(zbatch, loop, pts, skip_tol):
    """Per-draw product of w(p_j) for a batch of spectra (rows)."""
    side = zbatch.shape[1]
    vals = np.ones(zbatch.shape[0], dtype=np.complex128)
    keep = np.ones(zbatch.shape[0], dtype=bool)
    for p in pts:
        b = loop.b(p)
        kap = loop.a(p) / b
        dkap = (loop.da(p) * b - loop.a(p) * loop.db(p)) / (b * b)
        denom = kap + zbatch
        keep &= np.min(np.abs(denom), axis=1) >= skip_tol
        w = side * loop.db(p) / b + dkap * np.sum(1.0 / denom, axis=1)
        vals *= w
    return vals, keep


def _phase_averaged_batch(zbatch, delta):
    """Closed-form loop-shift average of w(p1)w(p2), delta = p1 - p2."""
    u = (zbatch - 1j) / (zbatch + 1j)
    inn = u * np.exp(2j * delta)  # r * u_m, broadcast below
    s = (u[:, :, None] + inn[:, None, :]) / (u[:, :, None] - inn[:, None, :])
    inside = np.abs(u) < 1.0
    io = inside[:, :, None] & ~inside[:, None, :]
    oi = ~inside[:, :, None] & inside[:, None, :]
    side = zbatch.shape[1]
    return (-float(side * side)
            - 2.0 * np.sum(s, axis=(1, 2), where=io)
            + 2.0 * np.sum(s, axis=(1, 2), where=oi))


def _phase_averaged_single(zbatch):
    """Loop-shift average of w(p): i * (2 * #{Im z > 0} - side) per draw."""
    side = zbatch.shape[1]
    return 1j * (2.0 * np.sum(zbatch.imag > 0, axis=1) - side)


def _mc_worker(k, pts, N, cls, loop, estimator, skip_tol, batch):
    def worker(rng, n_trials, stream_id):
        acc = EstimatorAccumulator()
        skipped = 0
        resampled = 0
        done = 0
        while done < n_trials:
            m = min(batch, n_trials - done)
            specs, res = ensembles.draw_spectra(N, cls, m, rng,
                                                collect=lambda s: s.z)
            resampled += res
            zb = np.array(specs)
            if estimator == "product":
                vals, keep = _product_batch(zb, loop, pts, skip_tol)
                skipped += int(np.sum(~keep))
                acc.add_batch(vals[keep])
            elif k == 2:
                acc.add_batch(_phase_averaged_batch(zb, pts[0] - pts[1]))
            else:
                acc.add_batch(_phase_averaged_single(zb))
            done += m
        return acc, skipped, resampled
    return worker


def _merge3(a, b):
    a[0].merge(b[0])
    return (a[0], a[1] + b[1], a[2] + b[2])


def mc_correlator(k, points, N, trials, seed=0, streams_count=None,
                  cls=ensembles.AIII, loop=None, estimator="product",
                  skip_tol=SKIP_TOL, batch=4096):
    """Monte Carlo estimate of C_k(points) over fresh ensemble draws.

    estimator is "product" (plain per-draw product of w values, the
    defining average) or "phase_averaged" (k <= 2 only; same expectation,
    reduced variance; see the module docstring). Trials are partitioned
    across counter-based streams keyed by (seed, stream_id) and merged in
    stream order, so the estimate depends only on (seed, streams_count).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if loop is None:
        loop = trig_loop()
    pts = _check_points(loop, points)
    if len(pts) != k:
        raise ValueError(f"expected {k} points, got {len(pts)}")
    if estimator == "phase_averaged":
        if not loop.trig:
            raise ValueError("phase_averaged estimator requires the trig loop")
        if k > 2:
            raise ValueError("phase_averaged estimator supports k <= 2")
    elif estimator != "product":
        raise ValueError(f"unknown estimator {estimator!r}")

    worker = _mc_worker(k, pts, N, cls, loop, estimator, skip_tol, batch)
    acc, skipped, resampled = streams.run_partitioned(
        lambda rng, n, i: worker(rng, n, i),
        trials, seed, streams=streams_count, merge=_merge3)
    status = "ok"
    if skipped > SKIP_RATE_WARN * trials:
        status = "high-skip-rate"
        logger.warning("pole-proximity skip rate %.2e above %.0e",
                       skipped / trials, SKIP_RATE_WARN)
    return CorrelatorEstimate(
        points=tuple(pts), mean=acc.mean, stderr=acc.stderr_real(),
        trials=acc.count, skipped=skipped, status=status,
        stderr_imag=acc.stderr_imag(),
        extra={"resampled": resampled, "estimator": estimator})


def mc_c2_profile(deltas, N, trials, seed=0, streams_count=None,
                  cls=ensembles.AIII, estimator="product",
                  skip_tol=SKIP_TOL, batch=4096):
    """C_2 estimates at several separations from one shared set of draws.

    Evaluation points for separation D are placed symmetrically about
    pi/2 (p = (pi -+ D)/2), keeping both away from the b(p) = 0 poles for
    all D in (0, pi - 0.2]. Reusing the draws makes the estimates at
    different separations correlated, but each one is individually an
    unbiased estimate with a valid standard error.
    """
    loop = trig_loop()
    deltas = list(deltas)
    pt_pairs = [np.array([(np.pi - d) / 2.0, (np.pi + d) / 2.0])
                for d in deltas]
    for pts in pt_pairs:
        _check_points(loop, pts)

    def worker(rng, n_trials, stream_id):
        accs = [EstimatorAccumulator() for _ in deltas]
        skipped = [0] * len(deltas)
        resampled = 0
        done = 0
        while done < n_trials:
            m = min(batch, n_trials - done)
            specs, res = ensembles.draw_spectra(N, cls, m, rng,
                                                collect=lambda s: s.z)
            resampled += res
            zb = np.array(specs)
            for i, pts in enumerate(pt_pairs):
                if estimator == "product":
                    vals, keep = _product_batch(zb, loop, pts, skip_tol)
                    skipped[i] += int(np.sum(~keep))
                    accs[i].add_batch(vals[keep])
                else:
                    accs[i].add_batch(
                        _phase_averaged_batch(zb, pts[0] - pts[1]))
            done += m
        return accs, skipped, resampled

    def merge(a, b):
        for x, y in zip(a[0], b[0]):
            x.merge(y)
        return (a[0], [x + y for x, y in zip(a[1], b[1])], a[2] + b[2])

    accs, skipped, resampled = streams.run_partitioned(
        worker, trials, seed, streams=streams_count, merge=merge)
    out = []
    for i, (acc, pts) in enumerate(zip(accs, pt_pairs)):
        status = "ok" if skipped[i] <= SKIP_RATE_WARN * trials else "high-skip-rate"
        out.append(CorrelatorEstimate(
            points=tuple(pts), mean=acc.mean, stderr=acc.stderr_real(),
            trials=acc.count, skipped=skipped[i], status=status,
            stderr_imag=acc.stderr_imag(),
            extra={"resampled": resampled, "estimator": estimator,
                   "delta": deltas[i]}))
    return out


def analytic_C2_delta(N, delta):
    """Exact C_2 as a function of the separation, vectorized.

    Geometric-sum evaluation: -sum_{j<N} cos^{2j}(delta); identical to the
    displayed ratio away from the diagonal and equal to its limit -N on it.
    """
    delta = np.asarray(delta, dtype=float)
    c2 = np.cos(delta) ** 2
    acc = np.zeros_like(c2)
    term = np.ones_like(c2)
    for _ in range(N):
        acc += term
        term *= c2
        if np.all(term < 1e-20):  # geometric tail below double precision
            break
    return -acc


#: |sin(p1 - p2)| below this counts as the diagonal (coincident mod pi)
DIAGONAL_TOL = 1e-12


def analytic_C2(N, p1, p2):
    """Exact two-point correlator at angles (p1, p2).

    Points coincident mod pi (within DIAGONAL_TOL in |sin|) return the
    analytic diagonal limit -N and emit DiagonalLimitWarning so callers
    notice the flagged policy; the geometric sum is continuous there, so
    no accuracy is lost either way.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if abs(math.sin(p1 - p2)) < DIAGONAL_TOL:
        warnings.warn("C_2 evaluated on the diagonal; returning the limit -N",
                      DiagonalLimitWarning, stacklevel=2)
        return -float(N)
    return float(analytic_C2_delta(N, p1 - p2))


def L_entry(n, m, q, N):
    """Determinant entry L_{nm}(q) of the correlator assembly.

    L = ((-1)^{m-n} pi / q^{m-n+1}) * B(m, N-m+1) * branch, with branch
    u_m(N, q^2) for m >= n and -v_m(N, q^2) for m < n. The assembly of
    full correlators from these entries (a combinatorial determinant sum)
    is not implemented; the entries themselves are exposed and tested for
    forward compatibility. Magnitudes are assembled in log space so large
    N cannot overflow.
    """
    if not 1 <= n <= N or not 1 <= m <= N:
        raise ValueError(f"indices must satisfy 1 <= n, m <= N, got n={n}, m={m}")
    if q <= 0.0:
        raise ValueError(f"q must be positive, got {q}")
    log_mag = (math.log(math.pi) + specfun.log_euler_beta(m, N - m + 1)
               - (m - n + 1) * math.log(q))
    sign = -1.0 if (m - n) % 2 else 1.0
    if m >= n:
        branch = specfun.u_fn(m, N, q * q)
    else:
        branch = -specfun.v_fn(m, N, q * q)
    return sign * math.exp(log_mag) * branch


def unfolded_C2(N, alpha, psi1, psi2):
    """Rescaled finite-N two-point function N^{-2 alpha} C_2(psi/N^alpha)."""
    if psi1 == psi2:
        raise ValueError("unfolded coordinates must be distinct")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    scale = float(N) ** alpha
    return float(N ** (-2.0 * alpha) * analytic_C2_delta(N, (psi1 - psi2) / scale))


def f2_limit(alpha, psi1, psi2):
    """Limiting unfolded two-point function f_2^(alpha)(psi1, psi2).

    Three regimes in the rescaling exponent: -1/d^2 below alpha = 1/2,
    expm1(-d^2)/d^2 exactly at alpha = 1/2 (stable near d = 0), and 0
    above, with d = psi1 - psi2.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if psi1 == psi2:
        raise ValueError("unfolded coordinates must be distinct")
    d = psi1 - psi2
    if alpha < 0.5:
        return -1.0 / (d * d)
    if alpha == 0.5:
        return math.expm1(-d * d) / (d * d)
    return 0.0


def unfolding_sup_distance(N, alpha, delta_lo=0.5, delta_hi=5.0, num=2001,
                           clip_to_injective=True):
    """Sup distance between the rescaled finite-N curve and its limit.

    Evaluated on a uniform grid of unfolded separations. The finite-N
    curve is periodic: the rescaling delta -> delta/N^alpha is injective
    into a half-period only for delta <= (pi/2) N^alpha, and beyond that
    the curve revisits its diagonal dive, so convergence statements only
    make sense on the injective branch. clip_to_injective (default)
    truncates the grid there; pass False for the raw window.
    """
    hi = delta_hi
    if clip_to_injective:
        hi = min(hi, (math.pi / 2.0) * float(N) ** alpha)
    if hi <= delta_lo:
        raise ValueError("empty separation window after clipping")
    grid = np.linspace(delta_lo, hi, num)
    scale = float(N) ** alpha
    fin = N ** (-2.0 * alpha) * analytic_C2_delta(N, grid / scale)
    lim = np.array([f2_limit(alpha, d, 0.0) for d in grid])
    return float(np.max(np.abs(fin - lim)))
