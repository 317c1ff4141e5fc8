"""Pick the compiled kernels when built, else the numpy fallback.

Set ``DCTSENT_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _fallback

if os.environ.get("DCTSENT_PURE_PYTHON", "") not in ("", "0"):
    _impl = None
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = None

BACKEND = "cython" if _impl is not None else "python"
encode_ragged = _impl.encode_ragged if _impl is not None else _fallback.encode_ragged


def resolve_threads(threads=None):
    """Worker count: explicit value, else ``DCTSENT_THREADS``, else 1."""
    if threads is None:
        threads = int(os.environ.get("DCTSENT_THREADS", "1") or 1)
    if threads < 1:
        threads = os.cpu_count() or 1
    return threads
