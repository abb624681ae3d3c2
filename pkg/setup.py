"""Build script: compiles the optional Cython core.

If Cython or a C compiler is unavailable the install still succeeds and the
package falls back to the pure-numpy backend at import time.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext = Extension(
        "eistwist._core",
        ["src/eistwist/_core.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    ext_modules = cythonize(
        [ext],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except Exception as exc:  # pragma: no cover - environment dependent
    sys.stderr.write(f"eistwist: skipping compiled core ({exc}); "
                     "pure-python backend will be used\n")

setup(ext_modules=ext_modules)
