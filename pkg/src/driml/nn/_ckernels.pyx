# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled im2col/col2im: the memory-bound gather/scatter of conv layers.

The GEMM side of the convolution stays in BLAS; these loops replace the
strided-transpose copies that dominate the numpy fallback.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def im2col(cnp.float64_t[:, :, :, ::1] x, int kh, int kw, int sh, int sw):
    cdef Py_ssize_t b = x.shape[0]
    cdef Py_ssize_t ci = x.shape[1]
    cdef Py_ssize_t h = x.shape[2]
    cdef Py_ssize_t w = x.shape[3]
    cdef Py_ssize_t oh = (h - kh) // sh + 1
    cdef Py_ssize_t ow = (w - kw) // sw + 1
    out = np.empty((b * oh * ow, ci * kh * kw), dtype=np.float64)
    cdef cnp.float64_t[:, ::1] o = out
    cdef Py_ssize_t n, i, j, c, u, v, row, col, bi, bj
    with nogil:
        for n in range(b):
            for i in range(oh):
                bi = i * sh
                for j in range(ow):
                    bj = j * sw
                    row = (n * oh + i) * ow + j
                    col = 0
                    for c in range(ci):
                        for u in range(kh):
                            for v in range(kw):
                                o[row, col] = x[n, c, bi + u, bj + v]
                                col += 1
    return out, int(oh), int(ow)


def col2im(cnp.float64_t[:, ::1] cols, int b, int ci, int h, int w,
           int kh, int kw, int sh, int sw):
    cdef Py_ssize_t oh = (h - kh) // sh + 1
    cdef Py_ssize_t ow = (w - kw) // sw + 1
    out = np.zeros((b, ci, h, w), dtype=np.float64)
    cdef cnp.float64_t[:, :, :, ::1] o = out
    cdef Py_ssize_t n, i, j, c, u, v, row, col, bi, bj
    with nogil:
        for n in range(b):
            for i in range(oh):
                bi = i * sh
                for j in range(ow):
                    bj = j * sw
                    row = (n * oh + i) * ow + j
                    col = 0
                    for c in range(ci):
                        for u in range(kh):
                            for v in range(kw):
                                o[n, c, bi + u, bj + v] += cols[row, col]
                                col += 1
    return out
