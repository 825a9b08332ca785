from setuptools import setup, Extension

import numpy as np

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "soleprint._sweep",
                ["src/soleprint/_sweep.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except ImportError:
    # No Cython: install pure-Python only; the metric module falls back
    # to the numpy sweep at import time.
    extensions = []

setup(ext_modules=extensions)
