"""Kernel backend selection: compiled extension if built, numpy otherwise.

Set RADELLIPTIC_BACKEND=python or =cython to force a backend.
"""

import os

from . import numpy_backend

_requested = os.environ.get("RADELLIPTIC_BACKEND", "auto").lower()

BACKEND = "python"
assemble_system = numpy_backend.assemble_system

if _requested in ("auto", "cython"):
    try:
        from . import _speedups

        BACKEND = "cython"
        assemble_system = _speedups.assemble_system
    except ImportError:
        if _requested == "cython":
            raise

__all__ = ["assemble_system", "BACKEND", "numpy_backend"]
