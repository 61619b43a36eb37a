"""Kernel backend selection: compiled extension if available, numpy otherwise.

Call sites use ``_kernels.active.<fn>``.  The environment variable
``ELLIPTRACK_KERNELS`` forces a backend: ``compiled`` raises if the extension
is missing, ``fallback`` skips it.  Both backends produce bit-identical
results (enforced by the parity test suite).
"""

from __future__ import annotations

import os

from . import fallback

__all__ = ["active", "backend_name", "fallback"]

_forced = os.environ.get("ELLIPTRACK_KERNELS", "").strip().lower()

if _forced == "fallback":
    active = fallback
    backend_name = "fallback"
else:
    try:
        from . import _core
        active = _core
        backend_name = "compiled"
    except ImportError:
        if _forced == "compiled":
            raise ImportError(
                "ELLIPTRACK_KERNELS=compiled but the compiled extension is "
                "not importable; rebuild with Cython and a C compiler") from None
        active = fallback
        backend_name = "fallback"
