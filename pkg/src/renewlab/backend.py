"""Kernel backend selection.

Hot loops in this package are written once as plain Python functions and then
compiled with numba when it is available. The environment variable
``LAB_BACKEND`` picks the implementation:

    LAB_BACKEND=auto    use numba if importable, else pure numpy (default)
    LAB_BACKEND=numba   require numba, raise if it cannot be imported
    LAB_BACKEND=numpy   force the pure-numpy path even if numba is present

The flag is read once at import time. ``LAB_THREADS`` caps numba's thread
pool; kernels here are single-threaded loops, so this only matters when the
surrounding application also uses numba's parallel features.

Each kernel module keeps the undecorated function reachable (``*_py``), so
the benchmark suite can time both paths in one process regardless of flag.
"""

from __future__ import annotations

import os
import warnings


def _pick_backend() -> str:
    choice = os.environ.get("LAB_BACKEND", "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy"):
        warnings.warn(
            f"LAB_BACKEND={choice!r} not recognized, falling back to 'auto'",
            RuntimeWarning,
            stacklevel=2,
        )
        choice = "auto"
    if choice == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if choice == "numba":
            raise ImportError(
                "LAB_BACKEND=numba but numba is not importable"
            ) from None
        return "numpy"
    return "numba"


BACKEND = _pick_backend()
USING_NUMBA = BACKEND == "numba"

if USING_NUMBA:
    from numba import njit as _numba_njit

    def njit(*args, **kwargs):
        kwargs.setdefault("cache", True)
        if len(args) == 1 and callable(args[0]):
            return _numba_njit(cache=kwargs["cache"])(args[0])
        return _numba_njit(*args, **kwargs)

    _threads = os.environ.get("LAB_THREADS")
    if _threads:
        try:
            import numba

            want = max(1, int(_threads))
            numba.set_num_threads(min(want, numba.config.NUMBA_NUM_THREADS))
        except (ValueError, RuntimeError):
            warnings.warn(
                f"could not apply LAB_THREADS={_threads!r}", RuntimeWarning
            )
else:

    def njit(*args, **kwargs):  # noqa: ARG001 - mirror numba's signature
        def wrap(fn):
            return fn

        if len(args) == 1 and callable(args[0]):
            return args[0]
        return wrap
