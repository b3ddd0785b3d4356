"""Pure numpy implementation of the per-pixel kernels.

Vectorized over pixels, looping over search offsets.  For every pixel the
floating-point operations happen in the same order as in ``_kernels.pyx``,
so the two backends agree to the last bit apart from ``exp`` rounding.
"""

import numpy as np

from .imgcore import mirror_pad
from .kernreg import PIVOT_TOL, basis_width, solve_normal_batch

NAME = "python"


def search_offsets(radius):
    """Integer offsets ``(dy, dx)`` with ``dy^2 + dx^2 <= radius^2``, row-major."""
    return [
        (dy, dx)
        for dy in range(-radius, radius + 1)
        for dx in range(-radius, radius + 1)
        if dy * dy + dx * dx <= radius * radius
    ]


def _basis(d1, d2, m):
    return [1.0, d1, d2, d1 * d1, d1 * d2, d2 * d2][:m]


def _accumulate(A, g, phi, w, y):
    m = len(phi)
    for a in range(m):
        wa = w * phi[a]
        g[a] += wa * y
        for b in range(a, m):
            A[a, b] += wa * phi[b]


def _patch_ssd_map(padded, base, dy, dx, q, h, w):
    """SSD between each pixel's patch and the patch ``(dy, dx)`` away."""
    ext = (h + q - 1, w + q - 1)
    c = padded[base:base + ext[0], base:base + ext[1]]
    s = padded[base + dy:base + dy + ext[0], base + dx:base + dx + ext[1]]
    diff = c - s
    sq = diff * diff
    ssd = np.zeros((h, w))
    for a in range(q):
        for b in range(q):
            ssd += sq[a:a + h, b:b + w]
    return ssd


def nlm_filter(img, q, radius, sigma_r, sigma_s, threads=1):
    img = np.ascontiguousarray(img, dtype=np.float64)
    h, w = img.shape
    half = q // 2
    padded = mirror_pad(img, half + radius)
    vals = mirror_pad(img, radius)
    two_sr2 = 2.0 * sigma_r * sigma_r
    two_ss2 = 2.0 * sigma_s * sigma_s
    rows = np.arange(h)[:, None]
    cols = np.arange(w)[None, :]
    num = np.zeros((h, w))
    den = np.zeros((h, w))
    for dy, dx in search_offsets(radius):
        inside = (rows + dy >= 0) & (rows + dy < h) & (cols + dx >= 0) & (cols + dx < w)
        ssd = _patch_ssd_map(padded, radius, dy, dx, q, h, w)
        wgt = np.exp(-ssd / two_sr2) * np.exp(-float(dy * dy + dx * dx) / two_ss2)
        wgt = np.where(inside, wgt, 0.0)
        y = vals[radius + dy:radius + dy + h, radius + dx:radius + dx + w]
        num += wgt * y
        den += wgt
    return num / den


def nonlocal_fit(img, q, radius, sigma_r, sigma_s, order, ridge, threads=1):
    img = np.ascontiguousarray(img, dtype=np.float64)
    h, w = img.shape
    m = basis_width(order)
    half = q // 2
    padded = mirror_pad(img, half + radius)
    vals = mirror_pad(img, radius)
    two_sr2 = 2.0 * sigma_r * sigma_r
    two_ss2 = 2.0 * sigma_s * sigma_s
    rows = np.arange(h)[:, None]
    cols = np.arange(w)[None, :]
    A = np.zeros((m, m, h, w))
    g = np.zeros((m, h, w))
    for dy, dx in search_offsets(radius):
        inside = (rows + dy >= 0) & (rows + dy < h) & (cols + dx >= 0) & (cols + dx < w)
        ssd = _patch_ssd_map(padded, radius, dy, dx, q, h, w)
        wgt = np.exp(-ssd / two_sr2) * np.exp(-float(dy * dy + dx * dx) / two_ss2)
        wgt = np.where(inside, wgt, 0.0)
        y = vals[radius + dy:radius + dy + h, radius + dx:radius + dx + w]
        _accumulate(A, g, _basis(float(dy), float(dx), m), wgt, y)
    beta, bad = solve_normal_batch(A.reshape(m, m, -1), g.reshape(m, -1), ridge, PIVOT_TOL)
    return beta[0].reshape(h, w), int(bad.sum())


def fuse(pilot, frames, scale, q, radius, sigma_r, sigma_s, fusion_radius, order, ridge, threads=1):
    pilot = np.ascontiguousarray(pilot, dtype=np.float64)
    frames = np.ascontiguousarray(frames, dtype=np.float64)
    p = scale
    H, W = pilot.shape
    T, h, w = frames.shape
    m = basis_width(order)
    half = q // 2
    extra = radius + 2
    pp = mirror_pad(pilot, half * p)
    fp = np.stack([mirror_pad(f, half + extra) for f in frames])
    vals = np.stack([mirror_pad(f, extra) for f in frames])
    two_sr2 = 2.0 * sigma_r * sigma_r
    two_ss2 = 2.0 * sigma_s * sigma_s
    r2p2 = radius * radius * p * p
    R2 = fusion_radius * fusion_radius
    out = np.empty((H, W))
    n_fallback = 0
    n_empty = 0
    for ry in range(p):
        for rx in range(p):
            mh = len(range(ry, H, p))
            mw = len(range(rx, W, p))
            if mh == 0 or mw == 0:
                continue
            grid = [
                [pp[ry + p * a:ry + p * a + p * mh:p, rx + p * b:rx + p * b + p * mw:p] for b in range(q)]
                for a in range(q)
            ]
            mi = np.arange(mh)[:, None]
            ni = np.arange(mw)[None, :]
            A = np.zeros((m, m, mh, mw))
            g = np.zeros((m, mh, mw))
            for t in range(T):
                for di in range(-radius - 1, radius + 2):
                    for dj in range(-radius - 1, radius + 2):
                        oy = p * di - ry
                        ox = p * dj - rx
                        num = oy * oy + ox * ox
                        if num > r2p2 or num > R2:
                            continue
                        inside = (mi + di >= 0) & (mi + di < h) & (ni + dj >= 0) & (ni + dj < w)
                        if not inside.any():
                            continue
                        r0 = di + extra
                        c0 = dj + extra
                        ssd = np.zeros((mh, mw))
                        for a in range(q):
                            for b in range(q):
                                diff = grid[a][b] - fp[t, r0 + a:r0 + a + mh, c0 + b:c0 + b + mw]
                                ssd += diff * diff
                        d2 = float(num) / float(p * p)
                        wgt = np.exp(-ssd / two_sr2) * np.exp(-d2 / two_ss2)
                        wgt = np.where(inside, wgt, 0.0)
                        y = vals[t, r0:r0 + mh, c0:c0 + mw]
                        _accumulate(A, g, _basis(float(oy), float(ox), m), wgt, y)
            beta, bad = solve_normal_batch(A.reshape(m, m, -1), g.reshape(m, -1), ridge, PIVOT_TOL)
            empty = ~(A[0, 0].ravel() > 0)
            est = np.where(empty, pilot[ry::p, rx::p].ravel(), beta[0])
            out[ry::p, rx::p] = est.reshape(mh, mw)
            n_empty += int(empty.sum())
            n_fallback += int((bad & ~empty).sum())
    return out, n_fallback, n_empty
