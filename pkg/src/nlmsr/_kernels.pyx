# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-pixel kernels.

Same contract and same operation order as ``_pykernels``; rows of the output
are distributed over OpenMP threads.  Every pixel is computed independently,
so results do not depend on the thread count.
"""

import numpy as np

from cython.parallel cimport parallel, prange
from libc.math cimport exp, sqrt
from libc.stdlib cimport free, malloc

from .imgcore import mirror_pad
from .kernreg import PIVOT_TOL, basis_width
from ._pykernels import search_offsets

NAME = "cython"

cdef enum:
    MAXW = 6
    # A, g, phi, beta, s, diag, L, u
    BUFLEN = MAXW * MAXW + 5 * MAXW + MAXW * MAXW + MAXW


cdef inline void _basis(double d1, double d2, double* phi) noexcept nogil:
    phi[0] = 1.0
    phi[1] = d1
    phi[2] = d2
    phi[3] = d1 * d1
    phi[4] = d1 * d2
    phi[5] = d2 * d2


cdef inline void _accumulate(double* A, double* g, const double* phi, int m,
                             double w, double y) noexcept nogil:
    cdef int a, b
    cdef double wa
    for a in range(m):
        wa = w * phi[a]
        g[a] += wa * y
        for b in range(a, m):
            A[a * m + b] += wa * phi[b]


cdef int _solve(const double* A, const double* g, int m, double ridge, double tol,
                double* beta, double* work) noexcept nogil:
    """Solve the normal system into ``beta``; 0 = ok, 1 = order-0 fallback, 2 = no weight."""
    cdef double* s = work
    cdef double* dg = work + MAXW
    cdef double* u = work + 2 * MAXW
    cdef double* L = work + 3 * MAXW
    cdef int i, j, k
    cdef double acc, piv
    if not (A[0] > 0):
        return 2
    if m == 1:
        beta[0] = g[0] / A[0]
        return 0
    for i in range(m):
        dg[i] = A[i * m + i] + ridge
        if not (dg[i] > 0):
            beta[0] = g[0] / A[0]
            return 1
        s[i] = 1.0 / sqrt(dg[i])
    for j in range(m):
        piv = s[j] * dg[j] * s[j]
        for k in range(j):
            piv -= L[j * m + k] * L[j * m + k]
        if not (piv > tol):
            beta[0] = g[0] / A[0]
            return 1
        L[j * m + j] = sqrt(piv)
        for i in range(j + 1, m):
            acc = s[j] * A[j * m + i] * s[i]
            for k in range(j):
                acc -= L[i * m + k] * L[j * m + k]
            L[i * m + j] = acc / L[j * m + j]
    for i in range(m):
        acc = s[i] * g[i]
        for k in range(i):
            acc = acc - L[i * m + k] * u[k]
        u[i] = acc / L[i * m + i]
    for i in range(m - 1, -1, -1):
        acc = u[i]
        for k in range(i + 1, m):
            acc -= L[k * m + i] * beta[k]
        beta[i] = acc / L[i * m + i]
    for i in range(m):
        beta[i] = s[i] * beta[i]
    return 0


cdef void _ssd_row(const double* P, int pw, int k, int dy, int dx, int l0, int l1, int q,
                   double* ssd) noexcept nogil:
    """``ssd[l]`` for ``l0 <= l < l1``: patch at ``(k, l)`` vs patch at ``(k+dy, l+dx)``.

    Pixel-inner loop so the compiler can vectorize; per pixel the terms are
    still summed in patch row-major order.
    """
    cdef int a, b, l
    cdef double diff
    cdef const double* c
    cdef const double* s
    for l in range(l0, l1):
        ssd[l] = 0.0
    for a in range(q):
        for b in range(q):
            c = P + (k + a) * pw + b
            s = P + (k + dy + a) * pw + dx + b
            for l in range(l0, l1):
                diff = c[l] - s[l]
                ssd[l] = ssd[l] + diff * diff


cdef inline void _weights(double* ssd, int l0, int l1, double two_sr2, double geo) noexcept nogil:
    cdef int l
    for l in range(l0, l1):
        ssd[l] = exp(-ssd[l] / two_sr2) * geo


cdef void _nlm_row(const double* P, int pw, int k, int h, int w, int q,
                   const int* offs, int noff, double two_sr2, double two_ss2,
                   double* buf, double* out) noexcept nogil:
    cdef double* wgt = buf
    cdef double* num = buf + w
    cdef double* den = buf + 2 * w
    cdef int l, n, dy, dx, l0, l1, half = q // 2
    cdef double geo
    cdef const double* yrow
    for l in range(w):
        num[l] = 0.0
        den[l] = 0.0
    for n in range(noff):
        dy = offs[2 * n]
        dx = offs[2 * n + 1]
        if k + dy < 0 or k + dy >= h:
            continue
        l0 = max(0, -dx)
        l1 = min(w, w - dx)
        if l0 >= l1:
            continue
        geo = exp(-(<double>(dy * dy + dx * dx)) / two_ss2)
        _ssd_row(P, pw, k, dy, dx, l0, l1, q, wgt)
        _weights(wgt, l0, l1, two_sr2, geo)
        yrow = P + (k + dy + half) * pw + dx + half
        for l in range(l0, l1):
            num[l] = num[l] + wgt[l] * yrow[l]
            den[l] = den[l] + wgt[l]
    for l in range(w):
        out[k * w + l] = num[l] / den[l]


def nlm_filter(img, int q, int radius, double sigma_r, double sigma_s, int threads=1):
    img = np.ascontiguousarray(img, dtype=np.float64)
    cdef int h = img.shape[0], w = img.shape[1]
    cdef double[:, ::1] P = mirror_pad(img, q // 2)
    cdef int[:, ::1] offs = np.ascontiguousarray(search_offsets(radius), dtype=np.intc).reshape(-1, 2)
    cdef double[:, ::1] out = np.empty((h, w))
    cdef int pw = P.shape[1], noff = offs.shape[0], k
    cdef double two_sr2 = 2.0 * sigma_r * sigma_r, two_ss2 = 2.0 * sigma_s * sigma_s
    cdef int nt = max(threads, 1)
    cdef double* buf
    with nogil, parallel(num_threads=nt):
        buf = <double*>malloc(3 * w * sizeof(double))
        for k in prange(h, schedule="static"):
            _nlm_row(&P[0, 0], pw, k, h, w, q, &offs[0, 0], noff, two_sr2, two_ss2, buf, &out[0, 0])
        free(buf)
    return np.asarray(out)


cdef inline void _accumulate_row(double* A, double* g, const double* phi, int m, int n,
                                 int l0, int l1, const double* wgt, const double* y) noexcept nogil:
    """Vectorized :func:`_accumulate` over ``l0 <= l < l1``; ``A``/``g`` are planar (stride ``n``)."""
    cdef int a, b, l
    cdef double wa
    for a in range(m):
        for l in range(l0, l1):
            wa = wgt[l] * phi[a]
            g[a * n + l] += wa * y[l]
        for b in range(a, m):
            for l in range(l0, l1):
                wa = wgt[l] * phi[a]
                A[(a * m + b) * n + l] += wa * phi[b]


cdef int _fit_row(const double* P, int pw, int k, int h, int w, int q,
                  const int* offs, int noff, double two_sr2, double two_ss2,
                  int m, double ridge, double tol, double* buf, double* out) noexcept nogil:
    cdef double* Ar = buf
    cdef double* gr = Ar + MAXW * MAXW * w
    cdef double* wgt = gr + MAXW * w
    cdef double* A = wgt + w
    cdef double* g = A + MAXW * MAXW
    cdef double* phi = g + MAXW
    cdef double* beta = phi + MAXW
    cdef double* work = beta + MAXW
    cdef int l, n, i, dy, dx, l0, l1, status, half = q // 2, nfb = 0
    cdef double geo
    cdef const double* yrow
    for i in range(m * m * w):
        Ar[i] = 0.0
    for i in range(m * w):
        gr[i] = 0.0
    for n in range(noff):
        dy = offs[2 * n]
        dx = offs[2 * n + 1]
        if k + dy < 0 or k + dy >= h:
            continue
        l0 = max(0, -dx)
        l1 = min(w, w - dx)
        if l0 >= l1:
            continue
        geo = exp(-(<double>(dy * dy + dx * dx)) / two_ss2)
        _ssd_row(P, pw, k, dy, dx, l0, l1, q, wgt)
        _weights(wgt, l0, l1, two_sr2, geo)
        yrow = P + (k + dy + half) * pw + dx + half
        _basis(<double>dy, <double>dx, phi)
        _accumulate_row(Ar, gr, phi, m, w, l0, l1, wgt, yrow)
    for l in range(w):
        for i in range(m * m):
            A[i] = Ar[i * w + l]
        for i in range(m):
            g[i] = gr[i * w + l]
        status = _solve(A, g, m, ridge, tol, beta, work)
        if status != 0:
            nfb += 1
        out[k * w + l] = beta[0]
    return nfb


def nonlocal_fit(img, int q, int radius, double sigma_r, double sigma_s, int order,
                 double ridge, int threads=1):
    img = np.ascontiguousarray(img, dtype=np.float64)
    cdef int h = img.shape[0], w = img.shape[1]
    cdef double[:, ::1] P = mirror_pad(img, q // 2)
    cdef int[:, ::1] offs = np.ascontiguousarray(search_offsets(radius), dtype=np.intc).reshape(-1, 2)
    cdef double[:, ::1] out = np.empty((h, w))
    cdef int[::1] nfb = np.zeros(h, dtype=np.intc)
    cdef int pw = P.shape[1], noff = offs.shape[0], k, m = basis_width(order)
    cdef double two_sr2 = 2.0 * sigma_r * sigma_r, two_ss2 = 2.0 * sigma_s * sigma_s
    cdef double tol = PIVOT_TOL
    cdef int nt = max(threads, 1)
    cdef double* buf
    with nogil, parallel(num_threads=nt):
        buf = <double*>malloc(((MAXW * MAXW + MAXW + 1) * w + BUFLEN) * sizeof(double))
        for k in prange(h, schedule="static"):
            nfb[k] = _fit_row(&P[0, 0], pw, k, h, w, q, &offs[0, 0], noff, two_sr2, two_ss2,
                              m, ridge, tol, buf, &out[0, 0])
        free(buf)
    return np.asarray(out), int(np.asarray(nfb).sum())


cdef void _fuse_row(const double* PP, int ppw, const double* FP, int fh, int fw,
                    const double* pilot, int k, int H, int W, int T, int h, int w,
                    int p, int q, int radius, double R2,
                    double two_sr2, double two_ss2, int m, double ridge, double tol,
                    double* buf, double* out, int* counts) noexcept nogil:
    """One HR row, one column phase ``rx`` at a time: pixel ``l = rx + p*n``.

    For a fixed phase the LR offsets ``(di, dj)`` give the same HR offset for
    every ``n``, so the inner loops run over ``n`` with contiguous LR reads.
    Per pixel the samples are still visited in frame, LR row, LR column order.
    """
    cdef double* Ar = buf
    cdef double* gr = Ar + MAXW * MAXW * W
    cdef double* wgt = gr + MAXW * W
    cdef double* A = wgt + W
    cdef double* g = A + MAXW * MAXW
    cdef double* phi = g + MAXW
    cdef double* beta = phi + MAXW
    cdef double* work = beta + MAXW
    cdef int half = q // 2
    cdef int ry = k % p, mi = k // p
    cdef int rx, nw, n, n0, n1, t, i, di, dj, a, b, oy, ox, num, status, idx, l
    cdef int r2p2 = radius * radius * p * p
    cdef int fsize = fh * fw
    cdef double diff, d2, geo
    cdef const double* c
    cdef const double* f
    for rx in range(p):
        nw = (W - rx + p - 1) // p
        if nw <= 0:
            continue
        for idx in range(m * m * nw):
            Ar[idx] = 0.0
        for idx in range(m * nw):
            gr[idx] = 0.0
        for t in range(T):
            for di in range(-radius - 1, radius + 2):
                i = mi + di
                if i < 0 or i >= h:
                    continue
                oy = p * di - ry
                for dj in range(-radius - 1, radius + 2):
                    ox = p * dj - rx
                    num = oy * oy + ox * ox
                    if num > r2p2 or <double>num > R2:
                        continue
                    n0 = max(0, -dj)
                    n1 = min(nw, w - dj)
                    if n0 >= n1:
                        continue
                    for n in range(n0, n1):
                        wgt[n] = 0.0
                    for a in range(q):
                        for b in range(q):
                            c = PP + (k + p * a) * ppw + rx + p * b
                            f = FP + t * fsize + (i + a) * fw + dj + b
                            for n in range(n0, n1):
                                diff = c[p * n] - f[n]
                                wgt[n] = wgt[n] + diff * diff
                    d2 = (<double>num) / (<double>(p * p))
                    geo = exp(-d2 / two_ss2)
                    _weights(wgt, n0, n1, two_sr2, geo)
                    _basis(<double>oy, <double>ox, phi)
                    _accumulate_row(Ar, gr, phi, m, nw, n0, n1, wgt,
                                    FP + t * fsize + (i + half) * fw + dj + half)
        for n in range(nw):
            for idx in range(m * m):
                A[idx] = Ar[idx * nw + n]
            for idx in range(m):
                g[idx] = gr[idx * nw + n]
            l = rx + p * n
            status = _solve(A, g, m, ridge, tol, beta, work)
            if status == 2:
                out[k * W + l] = pilot[k * W + l]
                counts[2 * k + 1] += 1
            else:
                if status == 1:
                    counts[2 * k] += 1
                out[k * W + l] = beta[0]


def fuse(pilot, frames, int scale, int q, int radius, double sigma_r, double sigma_s,
         double fusion_radius, int order, double ridge, int threads=1):
    pilot = np.ascontiguousarray(pilot, dtype=np.float64)
    frames = np.ascontiguousarray(frames, dtype=np.float64)
    cdef int p = scale
    cdef int H = pilot.shape[0], W = pilot.shape[1]
    cdef int T = frames.shape[0], h = frames.shape[1], w = frames.shape[2]
    cdef int half = q // 2
    cdef double[:, ::1] PP = mirror_pad(pilot, half * p)
    cdef double[:, :, ::1] FP = np.ascontiguousarray(np.stack([mirror_pad(f, half) for f in frames]))
    cdef double[:, ::1] pil = pilot
    cdef double[:, ::1] out = np.empty((H, W))
    cdef int[:, ::1] counts = np.zeros((H, 2), dtype=np.intc)
    cdef int ppw = PP.shape[1], fh = FP.shape[1], fw = FP.shape[2], k, m = basis_width(order)
    cdef double two_sr2 = 2.0 * sigma_r * sigma_r, two_ss2 = 2.0 * sigma_s * sigma_s
    cdef double R2 = fusion_radius * fusion_radius
    cdef double tol = PIVOT_TOL
    cdef int nt = max(threads, 1)
    cdef double* buf
    with nogil, parallel(num_threads=nt):
        buf = <double*>malloc(((MAXW * MAXW + MAXW + 1) * W + BUFLEN) * sizeof(double))
        for k in prange(H, schedule="static"):
            _fuse_row(&PP[0, 0], ppw, &FP[0, 0, 0], fh, fw, &pil[0, 0], k, H, W, T, h, w,
                      p, q, radius, R2, two_sr2, two_ss2, m, ridge, tol, buf, &out[0, 0],
                      &counts[0, 0])
        free(buf)
    c = np.asarray(counts).sum(axis=0)
    return np.asarray(out), int(c[0]), int(c[1])
