from setuptools import Extension, setup

import numpy as np

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    ext_modules = cythonize(
        Extension(
            "hpaxis._kernel",
            ["src/hpaxis/_kernel.pyx"],
            include_dirs=[np.get_include()],
        ),
        language_level=3,
    )
else:
    # no Cython: install pure-Python only, the integrator falls back at import
    ext_modules = []

setup(ext_modules=ext_modules)
