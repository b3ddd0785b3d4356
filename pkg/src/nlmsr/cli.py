"""Command-line front end.

Subcommands::

    nlmsr denoise   IN.pgm OUT.pgm [--order N | --classic-nlm] ...
    nlmsr upscale   --frames 'dir/f_%03d.pgm:0:9' --out HR.pgm [--scale P] ...
    nlmsr synth     --out 'dir/f_%03d.pgm' [--truth IN.pgm | --size N] ...
    nlmsr psnr      A B [--quantize] [--csv]
    nlmsr bench     [--seed S] [--refs 0|all|0,3,...] [--out-dir DIR] ...

``A`` and ``B`` for ``psnr`` are single PGM files or sequences written as
``template:start:count``.  Exit status: 0 success, 1 runtime error, 2 usage
error.  All settings come from flags; ``--help`` on each subcommand lists
them with their defaults.
"""

import argparse
from dataclasses import replace
import logging
import os
import sys

from . import pnmio
from .errors import NlmsrError
from .experiment import BenchConfig, run_bench
from .honlm import HonlmParams, honlm_denoise
from .imgcore import gaussian_kernel, identity_kernel, uniform_kernel
from .metrics import format_csv, format_table, mean_psnr
from .nlm import NlmParams, nlm_denoise
from .superres import DeblurParams, SrParams, default_shifts, super_resolve, synth_degrade
from . import scenes

log = logging.getLogger("nlmsr")


def _odd(text):
    v = int(text)
    if v < 1 or v % 2 == 0:
        raise argparse.ArgumentTypeError(f"must be a positive odd integer, got {text}")
    return v


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return v


def _pos_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return v


def _pos_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return v


def _nonneg_float(text):
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return v


def parse_blur(text):
    """``identity``, ``uniform:N`` or ``gauss:N:SIGMA``."""
    parts = text.split(":")
    try:
        if parts == ["identity"]:
            return identity_kernel()
        if parts[0] == "uniform" and len(parts) == 2:
            return uniform_kernel(_odd(parts[1]))
        if parts[0] == "gauss" and len(parts) == 3:
            return gaussian_kernel(_odd(parts[1]), _pos_float(parts[2]))
    except (ValueError, NlmsrError) as exc:
        raise argparse.ArgumentTypeError(f"bad blur {text!r}: {exc}") from None
    raise argparse.ArgumentTypeError(f"bad blur {text!r}; use identity, uniform:N or gauss:N:SIGMA")


def _pattern(text):
    try:
        return pnmio.parse_pattern(text)
    except NlmsrError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _shifts(text):
    try:
        out = []
        for item in text.split(";"):
            dy, dx = item.split(",")
            out.append((int(dy), int(dx)))
        return out
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad shifts {text!r}; use 'dy,dx;dy,dx;...'") from None


def _refs(text):
    if text == "all":
        return "all"
    try:
        return tuple(_nonneg_int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad reference list {text!r}") from None


def _add_sr_flags(p):
    g = p.add_argument_group("fusion")
    g.add_argument("--scale", type=_pos_int, default=2, help="upscaling factor p (default 2)")
    g.add_argument("--order", type=int, choices=(0, 1, 2), default=2, help="regression order (default 2)")
    g.add_argument("--q", type=_odd, default=5, help="LR patch size, odd (default 5)")
    g.add_argument("--search-radius", type=_nonneg_int, default=3, help="LR search radius (default 3)")
    g.add_argument("--sigma-r", type=_pos_float, default=20.0, help="radiometric bandwidth (default 20)")
    g.add_argument("--sigma-s", type=_pos_float, default=None, help="spatial bandwidth (default radius/2)")
    g.add_argument("--fusion-radius", type=_nonneg_float, default=None,
                   help="HR regression support (default scale*search-radius)")
    g.add_argument("--ridge", type=_nonneg_float, default=0.0, help="solver ridge (default 0)")
    g.add_argument("--sr-iters", type=_pos_int, default=1, help="fusion passes, re-using the result as pilot (default 1)")
    d = p.add_argument_group("deblurring")
    d.add_argument("--blur", type=parse_blur, default="uniform:3",
                   help="blur H: identity, uniform:N, gauss:N:SIGMA (default uniform:3)")
    d.add_argument("--lambda", dest="lam", type=_nonneg_float, default=0.05, help="TV weight (default 0.05)")
    d.add_argument("--epsilon", type=_pos_float, default=1e-3, help="TV smoothing (default 1e-3)")
    d.add_argument("--step", type=_pos_float, default=0.1, help="gradient step (default 0.1)")
    d.add_argument("--iters", type=_nonneg_int, default=50, help="gradient iterations (default 50)")


def _common(p):
    p.add_argument("--threads", type=_pos_int, default=1, help="thread count hint (default 1)")
    p.add_argument("-v", "--verbose", action="store_true", help="one progress line per pass on stderr")


def build_parser():
    parser = argparse.ArgumentParser(prog="nlmsr", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("denoise", help="nonlocal-means / high-order nonlocal denoising")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--order", type=int, choices=(0, 1, 2), default=2, help="regression order (default 2)")
    p.add_argument("--classic-nlm", action="store_true", help="run the plain NLM filter instead")
    p.add_argument("--q", type=_odd, default=7, help="patch size, odd (default 7)")
    p.add_argument("--search-radius", type=_nonneg_int, default=10, help="search radius (default 10)")
    bw = p.add_mutually_exclusive_group()
    bw.add_argument("--sigma-r", type=_pos_float, default=None, help="radiometric bandwidth (default 70)")
    bw.add_argument("--noise-sigma", type=_pos_float, default=None,
                    help="noise level; sets sigma-r = q * noise-sigma")
    p.add_argument("--sigma-s", type=_pos_float, default=None, help="spatial bandwidth (default radius/2)")
    p.add_argument("--ridge", type=_nonneg_float, default=0.0, help="solver ridge (default 0)")
    _common(p)

    p = sub.add_parser("upscale", help="multi-frame super-resolution")
    p.add_argument("--frames", type=_pattern, required=True, help="template:start:count")
    p.add_argument("--out", required=True, help="output PGM")
    p.add_argument("--ref", type=_nonneg_int, default=0, help="reference frame index within the sequence (default 0)")
    _add_sr_flags(p)
    _common(p)

    p = sub.add_parser("synth", help="make a degraded test sequence")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--truth", help="ground-truth PGM (default: built-in test scene)")
    src.add_argument("--size", type=_pos_int, default=128, help="built-in scene size (default 128)")
    p.add_argument("--out", type=str, required=True, help="frame template, e.g. dir/f_%%03d.pgm")
    p.add_argument("--truth-out", default=None, help="also write the ground truth here")
    p.add_argument("--scale", type=_pos_int, default=2, help="decimation factor (default 2)")
    p.add_argument("--frames", type=_pos_int, default=9, help="number of frames T (default 9)")
    p.add_argument("--noise", type=_nonneg_float, default=2.0, help="noise sigma (default 2)")
    p.add_argument("--blur", type=parse_blur, default="uniform:3", help="blur kernel (default uniform:3)")
    p.add_argument("--shifts", type=_shifts, default=None, help="'dy,dx;...' (default: nearest-first grid)")
    p.add_argument("--seed", type=int, default=7, help="noise seed (default 7)")
    _common(p)

    p = sub.add_parser("psnr", help="PSNR report between images or sequences")
    p.add_argument("recon")
    p.add_argument("truth")
    p.add_argument("--peak", type=_pos_float, default=255.0, help="peak value (default 255)")
    p.add_argument("--quantize", action="store_true", help="round and clamp to 8 bits before scoring")
    p.add_argument("--csv", action="store_true", help="comma-separated rows instead of a table")
    p.add_argument("--label", default="recon", help="method label (default recon)")

    p = sub.add_parser("bench", help="synthetic benchmark: pilot vs orders 0, 1, 2")
    p.add_argument("--seed", type=int, default=7, help="noise seed (default 7)")
    p.add_argument("--size", type=_pos_int, default=128, help="ground-truth size (default 128)")
    p.add_argument("--frames", type=_pos_int, default=9, help="number of frames T (default 9)")
    p.add_argument("--noise", type=_nonneg_float, default=2.0, help="noise sigma (default 2)")
    p.add_argument("--refs", type=_refs, default=(0,), help="reference frames: 0,3,... or all (default 0)")
    p.add_argument("--out-dir", default=None, help="write reconstructions as PGM here")
    p.add_argument("--csv", action="store_true", help="comma-separated rows instead of a table")
    p.add_argument("--quantize", action="store_true", help="round and clamp to 8 bits before scoring")
    _add_sr_flags(p)
    _common(p)
    return parser


def parse_args(argv=None):
    """Parse and validate ``argv``; usage errors exit with status 2."""
    parser = build_parser()
    cfg = parser.parse_args(argv)
    if isinstance(getattr(cfg, "blur", None), str):
        cfg.blur = parse_blur(cfg.blur)
    if cfg.command == "bench" and cfg.refs != "all" and any(r >= cfg.frames for r in cfg.refs):
        parser.error(f"--refs must be below --frames ({cfg.frames})")
    return cfg


def _read_any(arg):
    if ":" in arg and "%" in arg:
        return list(pnmio.load_sequence(pnmio.parse_pattern(arg)))
    return [pnmio.read_pgm(arg)]


def _sr_params(cfg):
    sp = SrParams(cfg.scale, cfg.q, cfg.search_radius, cfg.sigma_r, cfg.sigma_s, cfg.order,
                  cfg.fusion_radius, cfg.ridge, cfg.sr_iters)
    dp = DeblurParams(cfg.blur, cfg.lam, cfg.epsilon, cfg.step, cfg.iters)
    return sp, dp


def _denoise(cfg):
    img = pnmio.read_pgm(cfg.input)
    if cfg.noise_sigma is not None:
        sigma_r = cfg.q * cfg.noise_sigma
    else:
        sigma_r = cfg.sigma_r if cfg.sigma_r is not None else 70.0
    nlm = NlmParams(cfg.q, cfg.search_radius, sigma_r, cfg.sigma_s)
    if cfg.classic_nlm:
        out = nlm_denoise(img, nlm, threads=cfg.threads)
    else:
        out = honlm_denoise(img, HonlmParams(nlm, cfg.order, cfg.ridge), threads=cfg.threads)
    pnmio.write_pgm(out, cfg.output)


def _upscale(cfg):
    seq = pnmio.load_sequence(cfg.frames)
    if cfg.ref >= len(seq):
        raise NlmsrError(f"--ref {cfg.ref} but the sequence has {len(seq)} frames")
    sp, dp = _sr_params(cfg)
    out = super_resolve(seq, sp, dp, ref_index=cfg.ref, threads=cfg.threads)
    pnmio.write_pgm(out, cfg.out)


def _synth(cfg):
    truth = pnmio.read_pgm(cfg.truth) if cfg.truth else scenes.test_scene(cfg.size)
    shifts = cfg.shifts if cfg.shifts is not None else default_shifts(cfg.frames)
    frames = synth_degrade(truth, cfg.scale, cfg.blur, cfg.noise, cfg.frames, shifts, cfg.seed)
    pat = pnmio.SequencePattern(os.path.dirname(cfg.out), os.path.basename(cfg.out), 0, cfg.frames)
    if pat.directory:
        os.makedirs(pat.directory, exist_ok=True)
    pnmio.save_sequence(frames, pat)
    if cfg.truth_out:
        pnmio.write_pgm(truth, cfg.truth_out)


def _psnr(cfg):
    recon, truth = _read_any(cfg.recon), _read_any(cfg.truth)
    if len(recon) == 1 and len(truth) == 1:
        from .metrics import PsnrReport, psnr, quantize

        a, b = recon[0], truth[0]
        if cfg.quantize:
            a, b = quantize(a), quantize(b)
        v = psnr(a, b, cfg.peak)
        report = PsnrReport(cfg.label, [(0, v)], v)
    else:
        report = mean_psnr(recon, truth, cfg.label, cfg.peak, cfg.quantize)
    sys.stdout.write(format_csv([report]) if cfg.csv else format_table([report]))


def _bench(cfg):
    sp, dp = _sr_params(cfg)
    refs = tuple(range(cfg.frames)) if cfg.refs == "all" else cfg.refs
    bc = BenchConfig(size=cfg.size, frames=cfg.frames, scale=cfg.scale, noise=cfg.noise, seed=cfg.seed,
                     blur=cfg.blur, sr=sp, deblur=dp, refs=refs, quantize=cfg.quantize,
                     threads=cfg.threads)
    res = run_bench(bc)
    if cfg.csv:
        sys.stdout.write(format_csv(res.reports))
    else:
        title = (f"synthetic {cfg.size}x{cfg.size}, T={cfg.frames}, p={cfg.scale}, "
                 f"noise {cfg.noise:g}, seed {cfg.seed}: PSNR (dB)")
        sys.stdout.write(format_table(res.reports, title))
    if cfg.out_dir:
        os.makedirs(cfg.out_dir, exist_ok=True)
        for m, imgs in res.images.items():
            slug = m.split(" (")[0].replace(" ", "_")
            for t, img in zip(refs, imgs):
                pnmio.write_pgm(img, os.path.join(cfg.out_dir, f"{slug}_ref{t:02d}.pgm"))


_COMMANDS = {"denoise": _denoise, "upscale": _upscale, "synth": _synth, "psnr": _psnr, "bench": _bench}


def run(cfg):
    """Execute a parsed configuration; returns the process exit status."""
    if getattr(cfg, "verbose", False):
        logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
    try:
        _COMMANDS[cfg.command](cfg)
    except (NlmsrError, OSError) as exc:
        print(f"nlmsr {cfg.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv=None):
    try:
        cfg = parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    return run(cfg)
