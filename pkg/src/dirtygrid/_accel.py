"""Numba switch.

Hot kernels are written once as plain loops. When numba is importable and
``DIRTYGRID_NUMBA`` is not set to ``0``, :func:`kernel` compiles them with
``njit``; otherwise callers dispatch to their vectorised numpy twins.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is optional
    numba = None

HAVE_NUMBA = numba is not None


def numba_enabled():
    flag = os.environ.get("DIRTYGRID_NUMBA", "1").strip().lower()
    return HAVE_NUMBA and flag not in ("0", "false", "no", "off")


def kernel(func):
    """Compile ``func`` with ``numba.njit(cache=True)`` if numba is present.

    The undecorated function stays reachable as ``func.py_func`` either way,
    which the tests use to check the compiled and interpreted paths agree.
    """
    if not HAVE_NUMBA:
        func.py_func = func
        return func
    return numba.njit(cache=True, nogil=True)(func)
