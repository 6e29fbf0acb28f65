"""Backend selection for the hot kernels.

Tries the compiled Cython extension first and falls back to the numpy
implementations. BACKEND reports which one is active; both export the
same three functions with identical contracts.
"""

try:
    from windstat._kernels_cy import (betainc_cf, poisson_binomial,
                                      trace_density_grid)
    BACKEND = "cython"
except ImportError:  # extension not built; pure backend is fully equivalent
    from windstat._kernels_py import (betainc_cf, poisson_binomial,
                                      trace_density_grid)
    BACKEND = "python"

__all__ = ["BACKEND", "betainc_cf", "trace_density_grid", "poisson_binomial"]
