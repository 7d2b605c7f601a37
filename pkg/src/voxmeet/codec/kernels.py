"""Kernel backend selection.

Prefers the compiled extension (voxmeet.codec._kernels_cy) and falls back
to the numpy implementation. Set VOXMEET_PURE_PYTHON=1 to force the
fallback; both backends produce identical bytes.
"""

from __future__ import annotations

import os

if os.environ.get("VOXMEET_PURE_PYTHON"):
    from voxmeet.codec import _kernels_np as _impl

    BACKEND = "numpy"
else:
    try:
        from voxmeet.codec import _kernels_cy as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from voxmeet.codec import _kernels_np as _impl

        BACKEND = "numpy"

morton_encode = _impl.morton_encode
morton_decode = _impl.morton_decode
occupancy_encode = _impl.occupancy_encode
occupancy_decode = _impl.occupancy_decode
merge_duplicate_cells = _impl.merge_duplicate_cells
rle_encode = _impl.rle_encode
rle_decode = _impl.rle_decode


def active_backend() -> str:
    """Name of the kernel backend selected at import ('compiled' or 'numpy')."""
    return BACKEND
