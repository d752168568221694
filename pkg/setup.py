"""Build script: compiles the routing kernel extension when Cython is available.

The package works without the extension (a pure-Python kernel is selected at
import time), so a missing or failing Cython toolchain degrades gracefully to
a source-only install.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension("drwasim._kernel", ["src/drwasim/_kernel.pyx"])],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )
except ImportError:
    print("drwasim: Cython not available, installing with pure-Python kernel only",
          file=sys.stderr)

setup(ext_modules=ext_modules)
