# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled conv/pool kernels. Same contracts as ``_pykernels``."""
import numpy as np
cimport numpy as cnp

cnp.import_array()

NAME = "cython"


def im2col3x3(const double[:, :, :, ::1] x):
    cdef Py_ssize_t n = x.shape[0], h = x.shape[1], w = x.shape[2], c = x.shape[3]
    out_arr = np.zeros((n * h * w, 9 * c), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t b, i, j, ky, kx, ch, row, si, sj, base
    with nogil:
        for b in range(n):
            for i in range(h):
                for j in range(w):
                    row = (b * h + i) * w + j
                    for ky in range(3):
                        si = i + ky - 1
                        if si < 0 or si >= h:
                            continue
                        for kx in range(3):
                            sj = j + kx - 1
                            if sj < 0 or sj >= w:
                                continue
                            base = (ky * 3 + kx) * c
                            for ch in range(c):
                                out[row, base + ch] = x[b, si, sj, ch]
    return out_arr


def col2im3x3(const double[:, ::1] dcols, Py_ssize_t n, Py_ssize_t h, Py_ssize_t w, Py_ssize_t c):
    if dcols.shape[0] != n * h * w or dcols.shape[1] != 9 * c:
        raise ValueError("dcols shape does not match (n, h, w, c)")
    dx_arr = np.zeros((n, h, w, c), dtype=np.float64)
    cdef double[:, :, :, ::1] dx = dx_arr
    cdef Py_ssize_t b, p, q, ky, kx, ch, si, sj, row, base
    with nogil:
        for b in range(n):
            for p in range(h):
                for q in range(w):
                    # ascending tap order keeps sums identical to the numpy backend
                    for ky in range(3):
                        si = p + 1 - ky
                        if si < 0 or si >= h:
                            continue
                        for kx in range(3):
                            sj = q + 1 - kx
                            if sj < 0 or sj >= w:
                                continue
                            row = (b * h + si) * w + sj
                            base = (ky * 3 + kx) * c
                            for ch in range(c):
                                dx[b, p, q, ch] += dcols[row, base + ch]
    return dx_arr


def maxpool2x2(const double[:, :, :, ::1] x):
    cdef Py_ssize_t n = x.shape[0], h = x.shape[1], w = x.shape[2], c = x.shape[3]
    cdef Py_ssize_t hh = h // 2, ww = w // 2
    out_arr = np.empty((n, hh, ww, c), dtype=np.float64)
    arg_arr = np.empty((n, hh, ww, c), dtype=np.uint8)
    cdef double[:, :, :, ::1] out = out_arr
    cdef unsigned char[:, :, :, ::1] arg = arg_arr
    cdef Py_ssize_t b, i, j, ch, k
    cdef double best, v
    cdef unsigned char best_k
    with nogil:
        for b in range(n):
            for i in range(hh):
                for j in range(ww):
                    for ch in range(c):
                        best = x[b, 2 * i, 2 * j, ch]
                        best_k = 0
                        for k in range(1, 4):
                            v = x[b, 2 * i + k // 2, 2 * j + k % 2, ch]
                            if v > best:
                                best = v
                                best_k = <unsigned char>k
                        out[b, i, j, ch] = best
                        arg[b, i, j, ch] = best_k
    return out_arr, arg_arr


def maxpool2x2_backward(const double[:, :, :, ::1] dout, const unsigned char[:, :, :, ::1] argmax):
    cdef Py_ssize_t n = dout.shape[0], hh = dout.shape[1], ww = dout.shape[2], c = dout.shape[3]
    dx_arr = np.zeros((n, 2 * hh, 2 * ww, c), dtype=np.float64)
    cdef double[:, :, :, ::1] dx = dx_arr
    cdef Py_ssize_t b, i, j, ch, k
    with nogil:
        for b in range(n):
            for i in range(hh):
                for j in range(ww):
                    for ch in range(c):
                        k = argmax[b, i, j, ch]
                        dx[b, 2 * i + k // 2, 2 * j + k % 2, ch] = dout[b, i, j, ch]
    return dx_arr
