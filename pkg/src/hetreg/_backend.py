"""Backend selection for the hot numeric kernels.

Two implementations of every kernel live in ``hetreg._kernels``: a numba
``@njit`` version and a pure-numpy fallback. The active path is chosen by the
``HETREG_BACKEND`` environment variable:

* ``HETREG_BACKEND=numba``  -- require the JIT path (error if numba missing),
* ``HETREG_BACKEND=numpy``  -- force the pure-numpy fallback,
* unset / ``auto``          -- numba when importable, numpy otherwise.

The variable is read at call time, so flipping it between calls (as the
benchmark script does) switches paths without re-importing.
"""

import os

ENV_VAR = "HETREG_BACKEND"

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dep, but stay usable
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(func):
            return func

        if len(args) == 1 and callable(args[0]):
            return args[0]
        return wrap


def active_backend() -> str:
    """Resolve the backend name ('numba' or 'numpy') from the environment."""
    choice = os.environ.get(ENV_VAR, "auto").strip().lower()
    if choice in ("", "auto"):
        return "numba" if HAVE_NUMBA else "numpy"
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError(
                "HETREG_BACKEND=numba requested but numba is not importable"
            )
        return "numba"
    raise ValueError(
        f"invalid {ENV_VAR}={choice!r}; expected 'numba', 'numpy' or 'auto'"
    )
