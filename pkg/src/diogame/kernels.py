"""Kernel selection: the compiled extension when built, else the Python twin.

Set DIOGAME_PURE=1 to force the Python path.
"""

from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("DIOGAME_PURE", "") not in ("1", "true"):
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]

        _impl = _compiled
        BACKEND = "cython"
    except ImportError:
        pass

INT64_SAFE = 2**62


def dominator_scan(q: int, p, r, c: float) -> list[int]:
    """See :func:`diogame._kernels_py.dominator_scan`.

    Falls back to the Python twin when products q*p_i overflow 64 bits.
    """
    p = [int(x) for x in p]
    r = [float(x) for x in r]
    if max((abs(x) for x in p), default=0) * q >= INT64_SAFE:
        return _kernels_py.dominator_scan(q, p, r, float(c))
    return _impl.dominator_scan(q, p, r, float(c))
