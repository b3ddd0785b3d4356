"""MSE / PSNR and per-method sequence reports.

PSNR of identical images is ``math.inf``; it is printed as ``inf``.  Mean
PSNR refuses to average infinities.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import ContractError, ParameterError

__all__ = ["mse", "psnr", "quantize", "PsnrReport", "mean_psnr", "format_table", "format_csv"]


def _pair(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ParameterError(f"image sizes differ: {a.shape} vs {b.shape}")
    return a, b


def mse(a, b):
    a, b = _pair(a, b)
    d = a - b
    return float(np.mean(d * d))


def psnr(a, b, peak=255.0):
    """``10 log10(peak^2 / mse)`` in dB; ``inf`` exactly when the images are identical.

    The mean square is taken of differences scaled by their largest
    magnitude, so tiny differences whose squares underflow still give a
    finite value.
    """
    a, b = _pair(a, b)
    d = a - b
    scale = float(np.max(np.abs(d))) if d.size else 0.0
    if scale == 0.0:
        return math.inf
    u = d / scale
    return 20.0 * math.log10(peak) - 20.0 * math.log10(scale) - 10.0 * math.log10(float(np.mean(u * u)))


def quantize(img):
    """Round half up and clamp to 0..255, as when writing an 8-bit file."""
    return np.clip(np.floor(np.asarray(img, dtype=np.float64) + 0.5), 0, 255)


@dataclass
class PsnrReport:
    method_label: str
    per_frame: list = field(default_factory=list)
    mean: float = math.nan


def mean_psnr(recon, truth, label, peak=255.0, quantized=False):
    """Score frame by frame and average; every frame must have finite PSNR."""
    recon = list(recon)
    truth = list(truth)
    if len(recon) != len(truth) or not recon:
        raise ParameterError(f"frame counts differ or are zero: {len(recon)} vs {len(truth)}")
    per_frame = []
    for t, (r, g) in enumerate(zip(recon, truth)):
        if quantized:
            r, g = quantize(r), quantize(g)
        v = psnr(r, g, peak)
        if math.isinf(v):
            raise ContractError(f"frame {t} is identical to its reference; PSNR is infinite")
        per_frame.append((t, v))
    mean = math.fsum(v for _, v in per_frame) / len(per_frame)
    return PsnrReport(label, per_frame, mean)


def _fmt(v):
    return "inf" if math.isinf(v) else f"{v:.4f}"


def format_table(reports, title=None):
    """Aligned text table: one row per method, mean first, then each frame."""
    frames = [t for t, _ in reports[0].per_frame] if reports else []
    width = max([len("method")] + [len(r.method_label) for r in reports])
    head = f"{'method':<{width}}  {'mean_db':>9}" + "".join(f"  {'f' + str(t):>9}" for t in frames)
    lines = [title] if title else []
    lines += [head, "-" * len(head)]
    for r in reports:
        lines.append(
            f"{r.method_label:<{width}}  {_fmt(r.mean):>9}"
            + "".join(f"  {_fmt(v):>9}" for _, v in r.per_frame)
        )
    return "\n".join(lines) + "\n"


def format_csv(reports):
    """Rows ``label,frame,psnr_db``; the mean is emitted with frame ``mean``."""
    lines = ["label,frame,psnr_db"]
    for r in reports:
        for t, v in r.per_frame:
            lines.append(f"{r.method_label},{t},{_fmt(v)}")
        lines.append(f"{r.method_label},mean,{_fmt(r.mean)}")
    return "\n".join(lines) + "\n"
