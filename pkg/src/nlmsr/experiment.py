"""Synthetic super-resolution benchmark shaped like a mean-PSNR table.

One synthetic ground truth is degraded into ``T`` shifted frames.  For each
selected reference frame the bicubic pilot and the full pipeline at orders
0, 1 and 2 are scored against the correspondingly shifted ground truth.
"""

from dataclasses import dataclass, field, replace
import logging

import numpy as np

from . import scenes
from .imgcore import uniform_kernel
from .metrics import mean_psnr
from .superres import (
    DeblurParams,
    SrParams,
    default_shifts,
    initial_estimate,
    super_resolve,
    synth_degrade,
    translate,
)

log = logging.getLogger(__name__)

METHODS = ("bicubic pilot", "order 0 (NLM)", "order 1", "order 2")


@dataclass
class BenchConfig:
    size: int = 128
    frames: int = 9
    scale: int = 2
    noise: float = 2.0
    seed: int = 7
    blur: np.ndarray = field(default_factory=lambda: uniform_kernel(3))
    sr: SrParams = field(default_factory=SrParams)
    deblur: DeblurParams = None
    refs: tuple = (0,)
    quantize: bool = False
    threads: int = 1

    def __post_init__(self):
        if self.deblur is None:
            self.deblur = DeblurParams(blur=self.blur)
        if self.sr.scale != self.scale:
            self.sr = replace(self.sr, scale=self.scale)


@dataclass
class BenchResult:
    reports: list
    images: dict
    truths: list
    frames: np.ndarray


def run_bench(cfg):
    """Run every method on every reference frame; returns a :class:`BenchResult`.

    ``refs`` defaults to frame 0, whose shift (0, 0) is the centre of the
    default shift pattern: the other frames are at most one pixel away.
    """
    truth = scenes.test_scene(cfg.size)
    shifts = default_shifts(cfg.frames)
    seq = synth_degrade(truth, cfg.scale, cfg.blur, cfg.noise, cfg.frames, shifts, cfg.seed)
    h, w = truth.shape
    truths = [translate(truth, shifts[t]) for t in cfg.refs]
    images = {m: [] for m in METHODS}
    for t in cfg.refs:
        images[METHODS[0]].append(initial_estimate(seq, t, cfg.scale)[:h, :w])
        for order in (0, 1, 2):
            sp = replace(cfg.sr, order=order)
            log.info("bench: reference %d, order %d", t, order)
            out = super_resolve(seq, sp, cfg.deblur, ref_index=t, threads=cfg.threads)
            images[METHODS[order + 1]].append(out[:h, :w])
    reports = [mean_psnr(images[m], truths, m, quantized=cfg.quantize) for m in METHODS]
    return BenchResult(reports, images, truths, seq)
