"""Streaming, mergeable moment accumulation for complex Monte Carlo output.

Welford-style updates extended to complex values: the accumulator tracks
the complex mean plus the full second-moment structure of (Re, Im), so
variance of the real part, the imaginary part, their covariance, and
standard errors are all available. merge() implements the parallel
(Chan-style) combination, so trials can be partitioned across workers and
combined associatively: the merged result is independent of the split.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = ["EstimatorAccumulator"]


@dataclass
class EstimatorAccumulator:
    """Streaming mean/variance/covariance of a complex observable."""

    count: int = 0
    mean: complex = 0.0 + 0.0j
    _m2_re: float = field(default=0.0, repr=False)
    _m2_im: float = field(default=0.0, repr=False)
    _m2_cross: float = field(default=0.0, repr=False)

    def add(self, value):
        """Fold in one observation (complex or real scalar)."""
        v = complex(value)
        self.count += 1
        delta = v - self.mean
        self.mean += delta / self.count
        delta2 = v - self.mean
        self._m2_re += delta.real * delta2.real
        self._m2_im += delta.imag * delta2.imag
        self._m2_cross += delta.real * delta2.imag

    def add_batch(self, values):
        """Fold in a 1-D array of observations (vectorized, then merged)."""
        values = np.asarray(values, dtype=np.complex128).ravel()
        n = values.size
        if n == 0:
            return
        batch = EstimatorAccumulator()
        batch.count = n
        batch.mean = complex(values.mean())
        dre = values.real - batch.mean.real
        dim = values.imag - batch.mean.imag
        batch._m2_re = float(np.dot(dre, dre))
        batch._m2_im = float(np.dot(dim, dim))
        batch._m2_cross = float(np.dot(dre, dim))
        self.merge(batch)

    def merge(self, other):
        """Combine another accumulator into this one (associative)."""
        if other.count == 0:
            return self
        if self.count == 0:
            self.count = other.count
            self.mean = other.mean
            self._m2_re = other._m2_re
            self._m2_im = other._m2_im
            self._m2_cross = other._m2_cross
            return self
        n1, n2 = self.count, other.count
        n = n1 + n2
        delta = other.mean - self.mean
        self._m2_re += other._m2_re + delta.real ** 2 * n1 * n2 / n
        self._m2_im += other._m2_im + delta.imag ** 2 * n1 * n2 / n
        self._m2_cross += other._m2_cross + delta.real * delta.imag * n1 * n2 / n
        self.mean += delta * n2 / n
        self.count = n
        return self

    # -- derived quantities -------------------------------------------------

    def variance_real(self):
        if self.count < 2:
            return 0.0
        return self._m2_re / (self.count - 1)

    def variance_imag(self):
        if self.count < 2:
            return 0.0
        return self._m2_im / (self.count - 1)

    def covariance(self):
        """Sample covariance between real and imaginary parts."""
        if self.count < 2:
            return 0.0
        return self._m2_cross / (self.count - 1)

    def variance(self):
        """Total variance E|x - mean|^2 (unbiased)."""
        return self.variance_real() + self.variance_imag()

    def stderr_real(self):
        if self.count == 0:
            return float("inf")
        return (self.variance_real() / self.count) ** 0.5

    def stderr_imag(self):
        if self.count == 0:
            return float("inf")
        return (self.variance_imag() / self.count) ** 0.5
