"""Build script with an optional Cython accelerator extension.

The compiled kernels are a pure speedup: if Cython or a C compiler is
missing, or the extension fails to build for any reason, the package
installs anyway and windstat.kernels falls back to the numpy backend.
"""

import os
import sys

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("WINDSTAT_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "windstat._kernels_cy",
                    ["src/windstat/_kernels_cy.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": 3},
        )
    except Exception as exc:  # noqa: BLE001 - degrade to pure python on any failure
        sys.stderr.write(f"windstat: skipping compiled kernels ({exc})\n")
        ext_modules = []

setup(ext_modules=ext_modules)
