"""Build script for the optional compiled core.

The package is fully functional without the extension (a numpy fallback is
selected at import time); building it makes the particle sweep and mean-shift
hot loops roughly an order of magnitude faster.
"""

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "palms._speedups",
                ["src/palms/_speedups.pyx"],
                include_dirs=[numpy.get_include()],
                # -ffp-contract=off keeps the collision predicate's floating
                # point results bit-identical to the numpy fallback (no FMA
                # contraction).
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
