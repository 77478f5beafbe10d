"""Pick the compiled kernel when available.

Set ``SHUFFLELOAD_PURE_PYTHON=1`` to force the pure-Python implementation.
"""
import os

from . import _kernel_py

python_pair_bytes = _kernel_py.pair_bytes
compiled_pair_bytes = None

try:
    from ._kernel import pair_bytes as compiled_pair_bytes
except ImportError:
    pass

if compiled_pair_bytes is not None and not os.environ.get("SHUFFLELOAD_PURE_PYTHON"):
    pair_bytes = compiled_pair_bytes
    BACKEND = "cython"
else:
    pair_bytes = python_pair_bytes
    BACKEND = "python"
