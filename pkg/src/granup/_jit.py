"""Kernel compilation switch.

Hot kernels are written once as plain numpy/scalar Python and compiled with
``numba.njit`` when numba is importable. Setting ``GRANUP_NUMBA=0`` keeps the
interpreted numpy path, which is handy for debugging and for benchmarking
the two against each other.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = numba is not None and os.environ.get("GRANUP_NUMBA", "1").strip().lower() not in (
    "0",
    "false",
    "off",
    "no",
)


def jit(func):
    if USE_NUMBA:
        return numba.njit(cache=True)(func)
    return func
