"""Kernel backend selection.

The compiled extension is preferred; the numpy implementation is the
fallback. Set TEXNOISE_PURE_PYTHON=1 to force the fallback (used by the
benchmark and by tests that compare the two).
"""

from __future__ import annotations

import os

if os.environ.get("TEXNOISE_PURE_PYTHON", "0") not in ("", "0"):
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as _impl  # type: ignore[no-redef]

        BACKEND = "python"

lbp_code_map_r1n8 = _impl.lbp_code_map_r1n8
lbp_code_map_circular = _impl.lbp_code_map_circular
ldp_code_map = _impl.ldp_code_map
