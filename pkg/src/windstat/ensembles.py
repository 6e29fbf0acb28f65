"""Chiral random-matrix ensembles and their spherical spectra.

A draw is a pair (K1, K2) of independent Gaussian blocks; all observables
in this package depend only on Y = K1^{-1} K2, whose eigenvalues follow
the spherical ensembles. Two symmetry classes are supported:

AIII (beta=2)
    K1, K2 are N x N complex Ginibre blocks (all entry components i.i.d.
    standard normal).

CII (beta=4)
    K1, K2 are 2N x 2N complex matrices with quaternion-real structure:
    in the 2x2-block embedding each quaternion entry is
    [[alpha, beta], [-conj(beta), conj(alpha)]], equivalently
    J conj(K) J^T = K with J = I_N (x) [[0, 1], [-1, 0]]. The spectrum
    of Y is then closed under complex conjugation (N conjugate pairs).

Eigenvalues are computed as the generalized problem K2 x = z K1 x (QZ),
never by explicitly inverting K1.

The Gaussian component variance is 1. Nothing downstream depends on the
choice because Y is invariant under (K1, K2) -> (c K1, c K2); that
invariance is asserted in the tests rather than assumed.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = [
    "AIII",
    "CII",
    "SymmetryClass",
    "ChiralSample",
    "SphericalSpectrum",
    "ResampleSignal",
    "PairingError",
    "symmetry_class",
    "sample_chiral_pair",
    "spherical_spectrum",
    "pair_conjugates",
    "count_inside",
    "half_plane_count",
    "spectrum_rows",
    "draw_spectra",
]

#: condition-number ceiling for K1 before a draw is rejected
COND_LIMIT = 1e12

#: relative tolerance for CII conjugate pairing
PAIRING_TOL = 1e-8


class ResampleSignal(Exception):
    """Draw rejected (ill-conditioned K1 or solver failure); redraw."""


class PairingError(Exception):
    """CII spectrum could not be matched into conjugate pairs."""


@dataclass(frozen=True)
class SymmetryClass:
    label: str
    dyson_beta: int

    def block_side(self, N):
        """Matrix side length beta*N/2 of the K blocks."""
        return self.dyson_beta * N // 2


AIII = SymmetryClass("AIII", 2)
CII = SymmetryClass("CII", 4)
_CLASSES = {"AIII": AIII, "CII": CII}


def symmetry_class(label):
    """Look up a SymmetryClass by its label."""
    try:
        return _CLASSES[label]
    except KeyError:
        raise ValueError(f"unknown symmetry class {label!r}; "
                         f"choose from {sorted(_CLASSES)}") from None


@dataclass
class ChiralSample:
    k1: np.ndarray
    k2: np.ndarray
    cls: SymmetryClass
    N: int
    stream_id: int = 0


@dataclass
class SphericalSpectrum:
    z: np.ndarray
    cls: SymmetryClass
    N: int


def _ginibre(n, rng):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def _quaternion_real(n, rng):
    """2n x 2n complex matrix with J conj(K) J^T = K, Gaussian components."""
    alpha = _ginibre(n, rng)
    beta = _ginibre(n, rng)
    m = np.empty((2 * n, 2 * n), dtype=np.complex128)
    m[0::2, 0::2] = alpha
    m[0::2, 1::2] = beta
    m[1::2, 0::2] = -beta.conj()
    m[1::2, 1::2] = alpha.conj()
    return m


def sample_chiral_pair(N, cls=AIII, rng=None, stream_id=0):
    """Draw one (K1, K2) pair with i.i.d. Gaussian components.

    rng is a numpy Generator (see windstat.streams.substream); identical
    generators reproduce bit-identical samples.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if rng is None:
        rng = np.random.default_rng()
    if cls.dyson_beta == 2:
        k1, k2 = _ginibre(N, rng), _ginibre(N, rng)
    else:
        k1, k2 = _quaternion_real(N, rng), _quaternion_real(N, rng)
    return ChiralSample(k1=k1, k2=k2, cls=cls, N=N, stream_id=stream_id)


def pair_conjugates(z, tol=PAIRING_TOL):
    """Match a conjugation-closed spectrum into exact conjugate pairs.

    Greedy nearest-conjugate matching; each matched pair (w, u) is replaced
    by (c, conj(c)) with c = (w + conj(u))/2, so the returned spectrum is
    exactly closed under conjugation. Raises PairingError if any match has
    relative residual above tol.
    """
    z = list(np.asarray(z, dtype=np.complex128))
    if len(z) % 2:
        raise PairingError("odd spectrum size cannot be conjugate-paired")
    out = np.empty(len(z), dtype=np.complex128)
    pos = 0
    worst = 0.0
    while z:
        w = z.pop(0)
        dists = [abs(u - np.conj(w)) for u in z]
        j = int(np.argmin(dists))
        worst = max(worst, dists[j] / max(1.0, abs(w)))
        u = z.pop(j)
        c = 0.5 * (w + np.conj(u))
        # orient each pair with the upper-half-plane member first
        if c.imag < 0:
            c = np.conj(c)
        out[pos] = c
        out[pos + 1] = np.conj(c)
        pos += 2
    if worst > tol:
        raise PairingError(
            f"conjugate pairing residual {worst:.3e} exceeds {tol:.1e}")
    return out


def spherical_spectrum(sample):
    """Eigenvalues of Y = K1^{-1} K2 via the generalized problem K2 x = z K1 x.

    Raises ResampleSignal when K1 is ill-conditioned (> COND_LIMIT) or the
    solver returns non-finite eigenvalues; the caller redraws. For CII the
    spectrum is post-processed into exact conjugate pairs.
    """
    if np.linalg.cond(sample.k1) > COND_LIMIT:
        raise ResampleSignal("K1 condition number above limit")
    z = scipy.linalg.eigvals(sample.k2, sample.k1)
    if not np.all(np.isfinite(z)):
        raise ResampleSignal("generalized eigensolver returned non-finite values")
    if sample.cls.dyson_beta == 4:
        z = pair_conjugates(z)
    return SphericalSpectrum(z=z, cls=sample.cls, N=sample.N)


def count_inside(spec, radius=1.0):
    """Number of eigenvalues with |z| <= radius.

    |z| exactly equal to the radius counts as inside (fixed convention;
    the event has measure zero). For CII each conjugate pair contributes
    one unit, matching the N-pair bookkeeping.
    """
    z = spec.z
    if spec.cls.dyson_beta == 4:
        z = z[0::2]  # one member per exact conjugate pair, |z| = |conj(z)|
    return int(np.sum(np.abs(z) <= radius))


def half_plane_count(spec):
    """Number of eigenvalues with Im z > 0 (no pair reduction)."""
    return int(np.sum(spec.z.imag > 0))


def spectrum_rows(spec, draw_id=0):
    """Serialize a spectrum as rows (draw_id, re, im), one per eigenvalue."""
    return [{"draw_id": draw_id, "re": f"{z.real:.12e}", "im": f"{z.imag:.12e}"}
            for z in spec.z]


def draw_spectra(N, cls, count, rng, collect=None):
    """Draw `count` valid spectra, resampling rejected draws.

    Returns (results, resampled) where results is the list of
    collect(spectrum) values (or the spectra themselves) and resampled
    counts rejected draws. Rejections are measure-zero events; the counter
    is surfaced so they can be reported rather than silently absorbed.
    """
    results = []
    resampled = 0
    while len(results) < count:
        sample = sample_chiral_pair(N, cls, rng)
        try:
            spec = spherical_spectrum(sample)
        except ResampleSignal:
            resampled += 1
            continue
        results.append(collect(spec) if collect is not None else spec)
    return results, resampled
