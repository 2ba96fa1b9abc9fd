import os

from setuptools import setup, Extension

import numpy as np

try:
    from Cython.Build import cythonize

    if not os.path.exists("src/stqec/_kernel.pyx"):
        raise ImportError("kernel source not present")
    ext_modules = cythonize(
        [
            Extension(
                "stqec._kernel",
                ["src/stqec/_kernel.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            ),
            Extension(
                "stqec._matching",
                ["src/stqec/_matching.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            ),
        ],
        compiler_directives={"language_level": 3},
    )
except ImportError:
    # No Cython available: the package falls back to the pure-Python kernel.
    ext_modules = []

setup(ext_modules=ext_modules)
