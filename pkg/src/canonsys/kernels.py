"""Kernel selection: compiled extension when available, pure Python otherwise.

Set CANONSYS_FORCE_PURE=1 to skip the compiled kernel (used by the benchmark
and by tests that compare the two implementations).
"""

from __future__ import annotations

import os

from . import _transfer_py

if os.environ.get("CANONSYS_FORCE_PURE"):
    _impl = _transfer_py
else:
    try:
        from . import _transfer as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _transfer_py

transfer_product = _impl.transfer_product
KERNEL_IMPL = _impl.IMPL

__all__ = ["transfer_product", "KERNEL_IMPL", "_transfer_py"]
