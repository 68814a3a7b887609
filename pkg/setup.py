"""Build script: compiles the optional C extension holding the hot kernels.

The package works without the extension (a numpy fallback is selected at
import time), so the extension is marked optional and a failed compile only
degrades performance.
"""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = [
    Extension(
        "gollgr._kernels._ccore",
        ["src/gollgr/_kernels/_ccore.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        optional=True,
    )
]

setup(
    ext_modules=cythonize(extensions, language_level=3) if cythonize else [],
)
