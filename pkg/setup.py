"""Build script for the optional compiled simplex kernels.

The package is fully functional without the extension: hmwtpp.kernels falls
back to the numpy implementation when `hmwtpp._kernels_c` is missing.  Set
HMWTPP_NO_EXT=1 to skip compilation entirely.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("HMWTPP_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "hmwtpp._kernels_c",
                    ["src/hmwtpp/_kernels_c.pyx"],
                    # -ffp-contract=off keeps float results bit-identical with
                    # the numpy fallback (no FMA contraction).
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
