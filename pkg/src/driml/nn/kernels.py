"""Kernel backend selection: compiled extension when importable, numpy otherwise.

Set DRIML_PURE_PYTHON=1 to force the numpy fallback regardless of what was
built.  Both backends produce the same column matrices, so downstream GEMMs
see identical inputs.
"""

from __future__ import annotations

import os

if os.environ.get("DRIML_PURE_PYTHON") == "1":
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as _impl

        BACKEND = "python"

im2col = _impl.im2col
col2im = _impl.col2im
