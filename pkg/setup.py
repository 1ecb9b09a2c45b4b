"""Build the optional Cython kernels.

The package imports and runs without them; ``berrytherm.kernels`` falls back
to the numpy implementation when the extension is missing.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("BERRYTHERM_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:  # pragma: no cover - build without Cython
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "berrytherm._kernels",
                    sources=["src/berrytherm/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3", "-fcx-limited-range"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
