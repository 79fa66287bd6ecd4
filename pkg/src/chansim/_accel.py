"""Optional numba acceleration for the hot numeric kernels.

The kernels in :mod:`chansim.kernels` are written once, in numpy-compatible
form, and compiled with ``numba.njit`` when available.  Setting the
environment variable ``QDK_PURE_NUMPY=1`` (or failing to import numba)
selects the interpreted pure-numpy path instead; results are identical,
only slower.  ``benchmarks/bench_kernels.py`` compares the two paths.
"""

import os

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via QDK_PURE_NUMPY in CI
    numba = None
    _HAVE_NUMBA = False


def _flag_set(name):
    return os.environ.get(name, "").strip().lower() in {"1", "true", "yes", "on"}


PURE_NUMPY = _flag_set("QDK_PURE_NUMPY")
NUMBA_ENABLED = _HAVE_NUMBA and not PURE_NUMPY


def maybe_njit(func):
    """Compile ``func`` with numba unless the pure-numpy path is selected."""
    if NUMBA_ENABLED:
        return numba.njit(cache=True)(func)
    return func


def python_impl(func):
    """Return the uncompiled implementation of a (possibly jitted) kernel."""
    return getattr(func, "py_func", func)
