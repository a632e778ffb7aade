"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import time from the ``FPQAOA_KERNELS``
environment variable: ``numba`` (default when numba imports) or ``numpy``.
Both backends are importable side by side through :func:`get_backend`, which
is what the tests and the benchmark script use.
"""

import logging
import os

from . import _numpy

log = logging.getLogger(__name__)

try:
    from . import _numba
except ImportError:  # pragma: no cover - numba missing
    _numba = None

BACKENDS = {"numpy": _numpy}
if _numba is not None:
    BACKENDS["numba"] = _numba


def get_backend(name=None):
    """Return the kernel module called ``name`` (or the active one)."""
    if name is None:
        return active
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable kernel backend {name!r}; "
                         f"have {sorted(BACKENDS)}") from None


def _select():
    want = os.environ.get("FPQAOA_KERNELS", "").strip().lower()
    if not want:
        return _numba if _numba is not None else _numpy
    if want not in BACKENDS:
        log.warning("FPQAOA_KERNELS=%s unavailable, falling back to numpy", want)
        return _numpy
    return BACKENDS[want]


active = _select()


def set_threads(jobs):
    """Bound the numba worker pool; a no-op for the numpy backend."""
    if jobs is None or _numba is None:
        return
    import numba

    numba.set_num_threads(max(1, min(int(jobs), numba.config.NUMBA_NUM_THREADS)))
