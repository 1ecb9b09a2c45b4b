"""Kernel selection.

The compiled extension is used when it imports; otherwise the numpy versions
are used.  Setting ``BERRYTHERM_PURE=1`` forces the fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
if os.environ.get("BERRYTHERM_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _kernels_py
else:
    _impl = _kernels_py

liouvillian_band = _impl.liouvillian_band
band_populations = _impl.band_populations
band_mask = _kernels_py.band_mask

__all__ = ["BACKEND", "liouvillian_band", "band_populations", "band_mask"]
