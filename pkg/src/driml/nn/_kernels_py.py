"""Pure-numpy im2col/col2im used when the compiled extension is unavailable."""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def im2col(x: np.ndarray, kh: int, kw: int, sh: int, sw: int):
    """Gather conv patches of (b, ci, h, w) into a (b*oh*ow, ci*kh*kw) matrix."""
    b, ci, h, w = x.shape
    win = sliding_window_view(x, (kh, kw), axis=(2, 3))[:, :, ::sh, ::sw]
    oh, ow = win.shape[2], win.shape[3]
    cols = np.ascontiguousarray(win.transpose(0, 2, 3, 1, 4, 5)).reshape(b * oh * ow, ci * kh * kw)
    return cols, oh, ow


def col2im(cols: np.ndarray, b: int, ci: int, h: int, w: int, kh: int, kw: int, sh: int, sw: int) -> np.ndarray:
    """Scatter-add a column matrix back onto the (b, ci, h, w) input grid."""
    oh = (h - kh) // sh + 1
    ow = (w - kw) // sw + 1
    patches = cols.reshape(b, oh, ow, ci, kh, kw).transpose(0, 3, 1, 2, 4, 5)
    out = np.zeros((b, ci, h, w), dtype=np.float64)
    for u in range(kh):
        for v in range(kw):
            out[:, :, u : u + sh * oh : sh, v : v + sw * ow : sw] += patches[:, :, :, :, u, v]
    return out
