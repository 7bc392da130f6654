"""Build script for the optional compiled SPIHT kernel.

The package works without the extension (a pure-Python twin is selected at
import time); building it makes block coding roughly two orders of magnitude
faster, which the acceptance suite relies on.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "blinqs.spiht._kernel",
                ["src/blinqs/spiht/_kernel.pyx"],
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
else:
    extensions = []

setup(ext_modules=extensions)
