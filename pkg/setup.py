"""Build script: compiles the optional tape-replay extension.

The package works without the extension (a pure-Python kernel is selected at
import time), so any failure to build it is non-fatal: we fall back to a
source-only install.
"""

from setuptools import Extension, setup


def _extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "scissorlab.autodiff._kernel",
        sources=["src/scissorlab/autodiff/_kernel.pyx"],
        # Forbid fused multiply-add contraction: the pure-Python kernel
        # evaluates every multiply and add as a separate IEEE operation, and
        # the two backends must agree bit-for-bit.
        extra_compile_args=["-ffp-contract=off"],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=_extensions())
