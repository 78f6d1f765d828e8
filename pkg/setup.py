"""Build script for the optional compiled kernel extension.

The package is pure Python plus one Cython extension holding the hot
im2col/col2im loops.  If Cython or a C compiler is unavailable the build
falls back to the numpy implementations selected at import time; set
DRIML_SKIP_EXT=1 to skip the extension build explicitly.
"""

import os

from setuptools import setup


def _extensions():
    if os.environ.get("DRIML_SKIP_EXT") == "1":
        return []
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    ext = Extension(
        "driml.nn._ckernels",
        sources=["src/driml/nn/_ckernels.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=_extensions())
