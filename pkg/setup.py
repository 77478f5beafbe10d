"""Build the optional Cython pair-enumeration kernel.

The package works without it: ``shuffleload._backend`` falls back to the
pure-Python loop when the extension is missing.
"""
import os
import sys

from setuptools import setup


def get_extensions():
    if os.environ.get("SHUFFLELOAD_NO_EXT"):
        return []
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        print("cython/numpy unavailable, building pure-Python only", file=sys.stderr)
        return []
    extensions = [
        Extension(
            "shuffleload._kernel",
            ["src/shuffleload/_kernel.pyx"],
            include_dirs=[numpy.get_include()],
            # no fused multiply-add: results must match the Python fallback bit for bit
            extra_compile_args=["-O2", "-ffp-contract=off", "-fno-fast-math"],
        )
    ]
    return cythonize(extensions, compiler_directives={"language_level": "3"})


setup(ext_modules=get_extensions())
