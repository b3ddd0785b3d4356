"""Raster substrate: images, patches, mirror padding, convolution and decimation.

Images are plain 2-D ``float64`` numpy arrays indexed ``[row, col]``.  Nothing
here clamps or quantizes; that only happens when writing files.

Out-of-range coordinates are resolved by whole-sample symmetric reflection
(``d c b | a b c d | c b a``), the same convention as ``numpy.pad(mode="reflect")``
but defined for any extent, including single-pixel axes.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, ParameterError

__all__ = [
    "Patch",
    "as_image",
    "check_odd",
    "check_kernel",
    "mirror_index",
    "mirror_pad",
    "mirror_pad_adjoint",
    "extract_patch",
    "patch_ssd",
    "convolve",
    "convolve_adjoint",
    "decimate",
    "upsample_zero_fill",
    "identity_kernel",
    "uniform_kernel",
    "gaussian_kernel",
]


@dataclass(frozen=True)
class Patch:
    """A ``q x q`` window of intensities taken around ``center``."""

    values: np.ndarray
    center: tuple

    @property
    def size(self):
        return self.values.shape[0]


def as_image(img, name="image"):
    """Validate ``img`` as a non-empty, finite 2-D raster and return it as float64."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise ParameterError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ParameterError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} contains NaN or Inf")
    return arr


def check_odd(q, name="q"):
    if int(q) != q or q < 1 or q % 2 == 0:
        raise ParameterError(f"{name} must be a positive odd integer, got {q!r}")
    return int(q)


def mirror_index(idx, n):
    """Map integer indices onto ``[0, n)`` by symmetric reflection about the edge samples."""
    idx = np.asarray(idx, dtype=np.int64)
    if n == 1:
        return np.zeros_like(idx)
    period = 2 * (n - 1)
    m = np.mod(idx, period)
    return np.where(m > n - 1, period - m, m)


def mirror_pad(img, pad):
    """Pad a 2-D array by ``pad`` samples on every side with mirror reflection."""
    h, w = img.shape
    rows = mirror_index(np.arange(-pad, h + pad), h)
    cols = mirror_index(np.arange(-pad, w + pad), w)
    return img[np.ix_(rows, cols)]


def mirror_pad_adjoint(padded, pad, shape):
    """Adjoint of :func:`mirror_pad`: fold the margin back onto the samples it copied."""
    h, w = shape
    rows = mirror_index(np.arange(-pad, h + pad), h)
    cols = mirror_index(np.arange(-pad, w + pad), w)
    tmp = np.zeros((h, padded.shape[1]))
    np.add.at(tmp, rows, padded)
    out = np.zeros((h, w))
    np.add.at(out.T, cols, tmp.T)
    return out


def _check_center(img, center):
    r, c = center
    h, w = img.shape
    if not (0 <= r < h and 0 <= c < w):
        raise ContractError(f"center {center} outside {h}x{w} image")
    return int(r), int(c)


def extract_patch(img, center, q):
    """Return the ``q x q`` :class:`Patch` centred on ``center`` (mirror-padded at borders)."""
    q = check_odd(q)
    img = np.asarray(img, dtype=np.float64)
    r, c = _check_center(img, center)
    half = q // 2
    rows = mirror_index(np.arange(r - half, r + half + 1), img.shape[0])
    cols = mirror_index(np.arange(c - half, c + half + 1), img.shape[1])
    return Patch(img[np.ix_(rows, cols)], (r, c))


def patch_ssd(a, b):
    """Sum of squared differences between two equally sized patches."""
    va = a.values if isinstance(a, Patch) else np.asarray(a, dtype=np.float64)
    vb = b.values if isinstance(b, Patch) else np.asarray(b, dtype=np.float64)
    if va.shape != vb.shape:
        raise ParameterError(f"patch sizes differ: {va.shape} vs {vb.shape}")
    d = va - vb
    return float(np.sum(d * d))


def check_kernel(k):
    k = np.asarray(k, dtype=np.float64)
    if k.ndim != 2 or k.shape[0] != k.shape[1]:
        raise ParameterError(f"kernel must be square 2-D, got shape {k.shape}")
    check_odd(k.shape[0], "kernel size")
    return k


def convolve(img, k):
    """Same-size 2-D convolution with mirror boundary handling.

    ``out[y, x] = sum_{u,v} k[u, v] * img[y - (u - c), x - (v - c)]`` with
    ``c`` the kernel centre index.
    """
    img = as_image(img)
    k = check_kernel(k)
    c = k.shape[0] // 2
    h, w = img.shape
    padded = mirror_pad(img, c)
    out = np.zeros((h, w))
    n = k.shape[0]
    for u in range(n):
        for v in range(n):
            if k[u, v] != 0.0:
                ry, rx = 2 * c - u, 2 * c - v
                out += k[u, v] * padded[ry:ry + h, rx:rx + w]
    return out


def convolve_adjoint(img, k):
    """Exact adjoint of :func:`convolve` for the same kernel.

    Away from the border this is correlation with ``k`` (convolution with the
    flipped kernel); at the border the padded margin is folded back so that
    ``<convolve(x, k), y> == <x, convolve_adjoint(y, k)>`` holds everywhere.
    """
    img = as_image(img)
    k = check_kernel(k)
    c = k.shape[0] // 2
    h, w = img.shape
    n = k.shape[0]
    acc = np.zeros((h + 2 * c, w + 2 * c))
    for u in range(n):
        for v in range(n):
            if k[u, v] != 0.0:
                ry, rx = 2 * c - u, 2 * c - v
                acc[ry:ry + h, rx:rx + w] += k[u, v] * img
    return mirror_pad_adjoint(acc, c, (h, w))


def _check_scale(p):
    if int(p) != p or p < 1:
        raise ParameterError(f"scale factor must be an integer >= 1, got {p!r}")
    return int(p)


def decimate(img, p):
    """Keep the samples on the top-left lattice (rows and cols divisible by ``p``)."""
    p = _check_scale(p)
    return np.array(np.asarray(img, dtype=np.float64)[::p, ::p])


def upsample_zero_fill(img, p):
    """Place samples on the top-left lattice of a ``p``-times larger zero image."""
    p = _check_scale(p)
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    out = np.zeros((h * p, w * p))
    out[::p, ::p] = img
    return out


def identity_kernel():
    return np.ones((1, 1))


def uniform_kernel(size=3):
    check_odd(size, "kernel size")
    return np.full((size, size), 1.0 / (size * size))


def gaussian_kernel(size, sigma):
    """Normalized isotropic Gaussian taps (DC gain 1)."""
    check_odd(size, "kernel size")
    if sigma <= 0:
        raise ParameterError("sigma must be positive")
    ax = np.arange(size) - size // 2
    g = np.exp(-(ax[:, None] ** 2 + ax[None, :] ** 2) / (2.0 * sigma * sigma))
    return g / g.sum()
