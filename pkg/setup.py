"""Build script: compiles the optional trial-simulation extension.

The package is fully functional without the extension (a NumPy fallback
is selected at import time), so any compiler failure downgrades to a
pure-Python install instead of aborting.
"""

import os
import sys

from setuptools import setup

ext_modules = []
if os.environ.get("RIS_SOP_SKIP_EXTENSION") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "ris_sop._kernels",
                    ["src/ris_sop/_kernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    # -ffp-contract=off: the NumPy backend must be able to
                    # reproduce the arithmetic, so fused multiply-adds that
                    # change rounding are disabled.
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except Exception as exc:  # pragma: no cover - exercised only on broken toolchains
        sys.stderr.write(
            "ris-sop: building without the compiled kernel (%s)\n" % exc
        )
        ext_modules = []

setup(ext_modules=ext_modules)
