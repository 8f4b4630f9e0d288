import numpy as np
from setuptools import Extension, setup

# The compiled kernels are optional: if Cython (or a C compiler) is not
# available the package falls back to the pure numpy kernels at import time.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "glmscreen._kernels",
                ["src/glmscreen/_kernels.pyx"],
                include_dirs=[np.get_include()],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "initializedcheck": False,
            "cdivision": True,
        },
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
