"""Numba/NumPy backend selection for the hot scheduler kernels.

The placement kernels are written once as plain Python over NumPy arrays and
compiled with ``numba.njit`` when available.  Setting ``PUNCTSIM_DISABLE_NUMBA=1``
(or numba simply being absent) keeps the pure-Python path; both paths run the
identical statements in the identical order, so decisions and all downstream
CSV output are bit-for-bit the same either way.  ``benchmarks/bench_backends.py``
measures the speed gap.
"""

import os


def _numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


DISABLED_BY_ENV = os.environ.get("PUNCTSIM_DISABLE_NUMBA", "").strip() in {"1", "true", "yes"}
NUMBA_ENABLED = _numba_available() and not DISABLED_BY_ENV


def maybe_jit(func):
    """Compile ``func`` with njit(cache=True) when the numba backend is active."""
    if NUMBA_ENABLED:
        from numba import njit

        return njit(cache=True)(func)
    return func


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"
