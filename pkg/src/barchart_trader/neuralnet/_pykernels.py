"""Pure numpy kernels; reference backend and fallback for ``_ckernels``.

All arrays are NHWC float64. Patch columns are ordered ``(ky, kx, c)`` so a
``(3, 3, Cin, Cout)`` kernel reshapes directly to ``(9 * Cin, Cout)``.
Accumulation in :func:`col2im3x3` runs in ascending tap order starting
from zero; the compiled backend reproduces that order bit for bit.
"""
import numpy as np

NAME = "python"


def im2col3x3(x):
    n, h, w, c = x.shape
    padded = np.zeros((n, h + 2, w + 2, c), dtype=np.float64)
    padded[:, 1:-1, 1:-1, :] = x
    cols = np.empty((n, h, w, 9, c), dtype=np.float64)
    for ky in range(3):
        for kx in range(3):
            cols[:, :, :, ky * 3 + kx, :] = padded[:, ky : ky + h, kx : kx + w, :]
    return cols.reshape(n * h * w, 9 * c)


def col2im3x3(dcols, n, h, w, c):
    taps = dcols.reshape(n, h, w, 9, c)
    padded = np.zeros((n, h + 2, w + 2, c), dtype=np.float64)
    for ky in range(3):
        for kx in range(3):
            padded[:, ky : ky + h, kx : kx + w, :] += taps[:, :, :, ky * 3 + kx, :]
    return np.ascontiguousarray(padded[:, 1:-1, 1:-1, :])


def maxpool2x2(x):
    n, h, w, c = x.shape
    blocks = x.reshape(n, h // 2, 2, w // 2, 2, c).transpose(0, 1, 3, 5, 2, 4)
    blocks = blocks.reshape(n, h // 2, w // 2, c, 4)
    arg = np.argmax(blocks, axis=-1)
    out = np.take_along_axis(blocks, arg[..., None], axis=-1)[..., 0]
    return np.ascontiguousarray(out), arg.astype(np.uint8)


def maxpool2x2_backward(dout, argmax):
    n, hh, ww, c = dout.shape
    onehot = argmax[..., None] == np.arange(4, dtype=np.uint8)
    blocks = np.where(onehot, dout[..., None], 0.0)
    dx = blocks.reshape(n, hh, ww, c, 2, 2).transpose(0, 1, 4, 2, 5, 3)
    return np.ascontiguousarray(dx.reshape(n, hh * 2, ww * 2, c))
