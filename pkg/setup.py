"""Build script: compiles the optional Cython kernel for embedding training.

The package works without the extension (a pure-Python kernel is selected at
import time), so any build failure here degrades to the fallback instead of
breaking the install.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("XPENGINE_SKIP_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/xpengine/kg/_sgd_cy.pyx"],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
