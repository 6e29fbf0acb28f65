"""Winding-number statistics of parametric chiral matrix families.

Random loops K(p) = a(p) K_1 + b(p) K_2 over the complex (AIII) and
quaternion (CII) chiral classes: integer winding numbers by two
independent routes, density correlators against closed forms, the exact
winding distribution, the moment generating function, and the Kitaev
chain as a 1x1 application. Hot kernels run on a compiled backend when
available (windstat.kernels.BACKEND says which one is active).
"""

__version__ = "0.1.0"

from windstat.kernels import BACKEND
from windstat.ensembles import (AIII, CII, sample_chiral_pair,
                                spherical_spectrum, symmetry_class)
from windstat.winding import (trig_loop, trig_loop_tr,
                              winding_number_contour, winding_number_count)
from windstat.correlators import (analytic_C2, f2_limit, mc_correlator,
                                  unfolded_C2)
from windstat.distribution import winding_pmf
from windstat.generators import (analytic_generator, fd_correlator_from_Z,
                                 mc_generator, pfaffian)
from windstat.kitaev import KitaevParams, dispersion_and_gap, kitaev_winding

__all__ = [
    "__version__",
    "BACKEND",
    "AIII",
    "CII",
    "sample_chiral_pair",
    "spherical_spectrum",
    "symmetry_class",
    "trig_loop",
    "trig_loop_tr",
    "winding_number_contour",
    "winding_number_count",
    "analytic_C2",
    "f2_limit",
    "mc_correlator",
    "unfolded_C2",
    "winding_pmf",
    "analytic_generator",
    "fd_correlator_from_Z",
    "mc_generator",
    "pfaffian",
    "KitaevParams",
    "dispersion_and_gap",
    "kitaev_winding",
]
