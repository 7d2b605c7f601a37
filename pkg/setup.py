"""Builds the optional compiled codec kernels.

The package works without the extension: voxmeet.codec.kernels falls back
to the numpy implementation when voxmeet.codec._kernels_cy is missing.
Build in place with:

    python setup.py build_ext --inplace
"""

import os

from setuptools import Extension, setup

PYX = "src/voxmeet/codec/_kernels_cy.pyx"

ext_modules = []
if not os.environ.get("VOXMEET_PURE_PYTHON") and os.path.exists(PYX):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("voxmeet.codec._kernels_cy", [PYX])],
            language_level="3",
        )
    except ImportError:
        print("Cython not available; building without compiled kernels.")

setup(ext_modules=ext_modules)
