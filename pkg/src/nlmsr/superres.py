"""Super-resolution without motion estimation.

Two stages.  Fusion places every low-resolution sample ``y_t[i, j]`` at the
high-resolution position ``(p*i, p*j)`` and estimates each high-resolution
pixel by an order-N weighted regression over the samples near it.  Sample
weights compare the reference pilot (an upscaled frame) with each frame
patch by patch, so matching content contributes regardless of how it moved.
The fused image is an estimate of the blurred scene, which the second stage
deblurs by gradient descent on a quadratic data term plus smoothed total
variation.

The synthetic degradation model used for testing lives here as well.
"""

from dataclasses import dataclass, field
import logging
import math

import numpy as np

from . import _backend
from . import rng
from .errors import ContractError, ParameterError
from .honlm import HonlmParams
from .imgcore import (
    as_image,
    check_odd,
    convolve,
    convolve_adjoint,
    decimate,
    mirror_index,
    uniform_kernel,
    check_kernel,
)
from .kernreg import check_order
from .nlm import NlmParams

log = logging.getLogger(__name__)

__all__ = [
    "SrParams",
    "DeblurParams",
    "as_sequence",
    "initial_estimate",
    "fusion_weight",
    "fuse_frames",
    "tv_objective",
    "tv_gradient",
    "tv_deblur",
    "super_resolve",
    "translate",
    "default_shifts",
    "synth_degrade",
]


@dataclass(frozen=True)
class SrParams:
    """Fusion settings.

    ``q`` and ``search_radius`` are in low-resolution pixels, ``fusion_radius``
    in high-resolution pixels (default ``scale * search_radius``, i.e. no
    extra restriction).  ``sr_iters > 1`` re-runs fusion with the previous
    result as pilot.
    """

    scale: int = 2
    q: int = 5
    search_radius: int = 3
    sigma_r: float = 20.0
    sigma_s: float = None
    order: int = 2
    fusion_radius: float = None
    ridge: float = 0.0
    sr_iters: int = 1

    def __post_init__(self):
        if int(self.scale) != self.scale or self.scale < 1:
            raise ParameterError("scale must be an integer >= 1")
        check_odd(self.q)
        check_order(self.order)
        if int(self.search_radius) != self.search_radius or self.search_radius < 0:
            raise ParameterError("search_radius must be a nonnegative integer")
        if self.sigma_s is None:
            object.__setattr__(self, "sigma_s", max(self.search_radius / 2.0, 0.5))
        if self.fusion_radius is None:
            object.__setattr__(self, "fusion_radius", float(self.scale * self.search_radius))
        if not (self.sigma_r > 0 and self.sigma_s > 0):
            raise ParameterError("sigma_r and sigma_s must be positive")
        if self.fusion_radius < 0 or self.ridge < 0:
            raise ParameterError("fusion_radius and ridge must be >= 0")
        if self.sr_iters < 1:
            raise ParameterError("sr_iters must be >= 1")

    def as_honlm(self):
        """The single-frame, unit-scale reading of these settings."""
        return HonlmParams(
            NlmParams(self.q, self.search_radius, self.sigma_r, self.sigma_s), self.order, self.ridge
        )


@dataclass(frozen=True)
class DeblurParams:
    blur: np.ndarray = field(default_factory=lambda: uniform_kernel(3))
    lam: float = 0.05
    epsilon: float = 1e-3
    step: float = 0.1
    iters: int = 50

    def __post_init__(self):
        k = check_kernel(self.blur)
        if abs(k.sum() - 1.0) > 1e-9:
            raise ParameterError("blur kernel must have unit DC gain")
        if self.lam < 0:
            raise ParameterError("lambda must be >= 0")
        if not (self.epsilon > 0 and self.step > 0):
            raise ParameterError("epsilon and step must be positive")
        if int(self.iters) != self.iters or self.iters < 0:
            raise ParameterError("iters must be a nonnegative integer")


def as_sequence(frames):
    """Validate a frame sequence and return it as a ``(T, h, w)`` float array."""
    if isinstance(frames, np.ndarray) and frames.ndim == 3:
        seq = np.asarray(frames, dtype=np.float64)
    else:
        frames = [as_image(f, "frame") for f in frames]
        if not frames:
            raise ParameterError("a frame sequence needs at least one frame")
        shape = frames[0].shape
        for t, f in enumerate(frames):
            if f.shape != shape:
                raise ParameterError(f"frame {t} is {f.shape}, expected {shape}")
        seq = np.stack(frames)
    if seq.shape[0] < 1 or not np.all(np.isfinite(seq)):
        raise ParameterError("frame sequence is empty or non-finite")
    return seq


def _keys(t):
    """Cubic convolution kernel (a = -0.5)."""
    t = np.abs(t)
    return np.where(
        t <= 1,
        1.5 * t**3 - 2.5 * t**2 + 1,
        np.where(t < 2, -0.5 * t**3 + 2.5 * t**2 - 4 * t + 2, 0.0),
    )


def _cubic_matrix(n, p):
    """``(n*p, n)`` interpolation matrix; sample ``i`` sits at output ``p*i``."""
    out = np.arange(n * p)
    src = out / p
    base = np.floor(src).astype(int)
    frac = src - base
    M = np.zeros((n * p, n))
    for tap in range(-1, 3):
        # edge replication keeps the interpolant monotone on ramps
        idx = np.clip(base + tap, 0, n - 1)
        np.add.at(M, (out, idx), _keys(frac - tap))
    return M


def initial_estimate(seq, ref_index, p):
    """Separable cubic upscale of frame ``ref_index`` by ``p`` (the pilot)."""
    seq = as_sequence(seq)
    if not (0 <= ref_index < seq.shape[0]):
        raise ParameterError(f"ref_index {ref_index} outside 0..{seq.shape[0] - 1}")
    if int(p) != p or p < 1:
        raise ParameterError("scale must be an integer >= 1")
    frame = seq[ref_index]
    if p == 1:
        return frame.copy()
    my = _cubic_matrix(frame.shape[0], p)
    mx = _cubic_matrix(frame.shape[1], p)
    return my @ frame @ mx.T


def fusion_weight(pilot, hr_pixel, frame, lr_pixel, sp):
    """Similarity of HR pilot position ``hr_pixel`` and LR frame pixel ``lr_pixel``.

    The pilot is sampled every ``p`` pixels around ``hr_pixel`` so that its
    ``q x q`` patch lives on the LR grid; both patches are mirror-padded.
    """
    pilot = np.asarray(pilot, dtype=np.float64)
    frame = np.asarray(frame, dtype=np.float64)
    k, l = hr_pixel
    i, j = lr_pixel
    if not (0 <= k < pilot.shape[0] and 0 <= l < pilot.shape[1]):
        raise ContractError(f"HR pixel {hr_pixel} outside pilot")
    if not (0 <= i < frame.shape[0] and 0 <= j < frame.shape[1]):
        raise ContractError(f"LR pixel {lr_pixel} outside frame")
    p = sp.scale
    oy, ox = p * i - k, p * j - l
    num = oy * oy + ox * ox
    if num > sp.search_radius**2 * p * p or num > sp.fusion_radius**2:
        return 0.0
    half = sp.q // 2
    a = np.arange(-half, half + 1)
    hp = pilot[np.ix_(mirror_index(k + p * a, pilot.shape[0]), mirror_index(l + p * a, pilot.shape[1]))]
    lp = frame[np.ix_(mirror_index(i + a, frame.shape[0]), mirror_index(j + a, frame.shape[1]))]
    diff = hp - lp
    ssd = float(np.sum(diff * diff))
    d2 = num / float(p * p)
    return math.exp(-ssd / (2.0 * sp.sigma_r**2)) * math.exp(-d2 / (2.0 * sp.sigma_s**2))


def fuse_frames(seq, sp, ref_index=0, pilot=None, threads=1, return_stats=False):
    """Fuse all frames onto the HR grid of frame ``ref_index``.

    HR pixels that receive no weight at all are copied from the pilot.  With
    ``return_stats`` the result is ``(image, stats)`` where ``stats`` counts
    order-0 fallbacks and pilot-filled pixels.
    """
    seq = as_sequence(seq)
    if pilot is None:
        pilot = initial_estimate(seq, ref_index, sp.scale)
    pilot = as_image(pilot, "pilot")
    k = _backend.kernels()
    stats = {"fallback": 0, "filled": 0}
    out = pilot
    for _ in range(sp.sr_iters):
        out, nfb, nfill = k.fuse(
            out, seq, sp.scale, sp.q, sp.search_radius, sp.sigma_r, sp.sigma_s,
            sp.fusion_radius, sp.order, sp.ridge, threads,
        )
        stats["fallback"] += nfb
        stats["filled"] += nfill
    if stats["filled"]:
        log.info("fusion: %d HR pixels had no support and were taken from the pilot", stats["filled"])
    if return_stats:
        return out, stats
    return out


def _diffs(x):
    dh = np.zeros_like(x)
    dv = np.zeros_like(x)
    dh[:, :-1] = x[:, 1:] - x[:, :-1]
    dv[:-1, :] = x[1:, :] - x[:-1, :]
    return dh, dv


def _diffs_adjoint(ph, pv):
    out = np.zeros_like(ph)
    out[:, :-1] -= ph[:, :-1]
    out[:, 1:] += ph[:, :-1]
    out[:-1, :] -= pv[:-1, :]
    out[1:, :] += pv[:-1, :]
    return out


def tv_objective(x, z_hat, dp):
    """``||H x - z_hat||^2 + lam * sum sqrt(Dh^2 + Dv^2 + eps^2)``.

    Forward differences; the last column / row has zero difference.
    """
    r = convolve(x, dp.blur) - z_hat
    dh, dv = _diffs(x)
    tv = np.sum(np.sqrt(dh * dh + dv * dv + dp.epsilon**2))
    return float(np.sum(r * r) + dp.lam * tv)


def tv_gradient(x, z_hat, dp):
    x = as_image(x)
    z_hat = as_image(z_hat, "z_hat")
    if x.shape != z_hat.shape:
        raise ParameterError(f"size mismatch {x.shape} vs {z_hat.shape}")
    grad = 2.0 * convolve_adjoint(convolve(x, dp.blur) - z_hat, dp.blur)
    if dp.lam:
        dh, dv = _diffs(x)
        mag = np.sqrt(dh * dh + dv * dv + dp.epsilon**2)
        grad = grad + dp.lam * _diffs_adjoint(dh / mag, dv / mag)
    return grad


def tv_deblur(z_hat, dp, return_history=False):
    """Gradient descent from ``z_hat``; the step is halved whenever the objective would rise."""
    z_hat = as_image(z_hat, "z_hat")
    x = z_hat.copy()
    obj = tv_objective(x, z_hat, dp)
    history = [obj]
    step = dp.step
    for _ in range(dp.iters):
        g = tv_gradient(x, z_hat, dp)
        while True:
            cand = x - step * g
            cand_obj = tv_objective(cand, z_hat, dp)
            if cand_obj <= obj:
                break
            step *= 0.5
            if step < dp.step * 2.0**-40:
                break
        if cand_obj > obj:
            break
        x, obj = cand, cand_obj
        history.append(obj)
    if return_history:
        return x, history
    return x


def super_resolve(seq, sp, dp, ref_index=0, threads=1):
    """Fusion followed by deblurring."""
    return tv_deblur(fuse_frames(seq, sp, ref_index, threads=threads), dp)


def translate(img, shift):
    """``out[y, x] = img[y + dy, x + dx]``, mirror-extended at the borders."""
    img = np.asarray(img, dtype=np.float64)
    dy, dx = (int(s) for s in shift)
    h, w = img.shape
    if abs(dy) >= h or abs(dx) >= w:
        raise ParameterError(f"shift {shift} too large for a {h}x{w} image")
    rows = mirror_index(np.arange(h) + dy, h)
    cols = mirror_index(np.arange(w) + dx, w)
    return img[np.ix_(rows, cols)]


def default_shifts(T):
    """First ``T`` integer shifts ordered by distance from (0, 0), then row-major."""
    s = 0
    while (2 * s + 1) ** 2 < T:
        s += 1
    cand = [(dy, dx) for dy in range(-s, s + 1) for dx in range(-s, s + 1)]
    cand.sort(key=lambda d: (d[0] ** 2 + d[1] ** 2, d[0], d[1]))
    return cand[:T]


def synth_degrade(truth, p, blur, noise_sigma, T, shifts=None, seed=0):
    """Shift, blur, decimate and add Gaussian noise to make ``T`` frames.

    Noise comes from :func:`rng.standard_normal` with ``seed`` and is laid out
    frame by frame in row-major order, so the sequence is reproducible.
    """
    truth = as_image(truth, "truth")
    if shifts is None:
        shifts = default_shifts(T)
    if len(shifts) != T:
        raise ParameterError(f"need {T} shifts, got {len(shifts)}")
    if noise_sigma < 0:
        raise ParameterError("noise_sigma must be >= 0")
    frames = np.stack([decimate(convolve(translate(truth, s), blur), p) for s in shifts])
    if noise_sigma > 0:
        frames = frames + noise_sigma * rng.standard_normal(seed, frames.size).reshape(frames.shape)
    return frames
