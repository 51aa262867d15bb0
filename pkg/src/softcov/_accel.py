"""Backend switch for the hot kernels.

Set ``SOFTCOV_NO_NUMBA=1`` to force the pure-numpy code paths.  The flag is
read once at import time; both variants of every kernel stay importable so
tests and benchmarks can compare them directly.
"""
import os

_DISABLED = os.environ.get("SOFTCOV_NO_NUMBA", "").strip().lower() in {"1", "true", "yes"}

try:
    import numba
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _DISABLED


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity decorator otherwise."""
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)

    def wrap(fn):
        return fn

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return wrap


def thread_count():
    """Worker threads for trial-level parallelism (``SOFTCOV_THREADS``)."""
    raw = os.environ.get("SOFTCOV_THREADS", "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"SOFTCOV_THREADS must be an integer, got {raw!r}")
    return os.cpu_count() or 1


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
