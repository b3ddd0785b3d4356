"""Netpbm PGM (P5 binary / P2 ASCII, maxval <= 255) reading and writing.

Writing always produces P5 with maxval 255 and the exact header
``P5\\n<w> <h>\\n255\\n``.  Real values are rounded half up and clamped.

Frame sequences are described by a printf-style template with one integer
field, e.g. ``frame_%04d.pgm``; on the command line a sequence is written
``dir/frame_%04d.pgm:<start>:<count>``.  Other formats can be converted
beforehand, e.g. ``python -c "from PIL import Image; Image.open('a.png').convert('L').save('a.pgm')"``.
"""

from dataclasses import dataclass
import os

import numpy as np

from .errors import ParameterError, PgmFormatError, UnsupportedFormatError
from .imgcore import as_image
from .metrics import quantize

__all__ = ["read_pgm", "write_pgm", "SequencePattern", "parse_pattern", "load_sequence", "save_sequence"]

_WS = b" \t\n\r\v\f"


class _Header:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def token(self, what):
        data, n = self.data, len(self.data)
        while self.pos < n:
            c = data[self.pos:self.pos + 1]
            if c in _WS:
                self.pos += 1
            elif c == b"#":
                while self.pos < n and data[self.pos:self.pos + 1] not in b"\r\n":
                    self.pos += 1
            else:
                break
        start = self.pos
        while self.pos < n and data[self.pos:self.pos + 1] not in _WS and data[self.pos:self.pos + 1] != b"#":
            self.pos += 1
        if start == self.pos:
            raise PgmFormatError(f"missing {what}", start)
        tok = data[start:self.pos]
        if not tok.isdigit():
            raise PgmFormatError(f"bad {what} {tok!r}", start)
        return int(tok), start


def read_pgm(path):
    """Read a P5 or P2 PGM file into a float64 image with values 0..255."""
    with open(path, "rb") as fh:
        data = fh.read()
    magic = data[:2]
    if magic not in (b"P5", b"P2"):
        if magic[:1] == b"P" and magic[1:2] in b"1346":
            raise UnsupportedFormatError(f"Netpbm type {magic.decode()} is not a grayscale PGM", 0)
        raise PgmFormatError(f"bad magic {magic!r}", 0)
    hdr = _Header(data)
    hdr.pos = 2
    if hdr.pos >= len(data) or data[2:3] not in _WS + b"#":
        raise PgmFormatError("no whitespace after magic", 2)
    width, _ = hdr.token("width")
    height, at = hdr.token("height")
    maxval, at = hdr.token("maxval")
    if width < 1 or height < 1:
        raise PgmFormatError(f"bad dimensions {width}x{height}", at)
    if not 0 < maxval < 65536:
        raise PgmFormatError(f"bad maxval {maxval}", at)
    if maxval > 255:
        raise UnsupportedFormatError(f"maxval {maxval} > 255 (16-bit PGM) is not supported", at)
    n = width * height
    if magic == b"P5":
        if hdr.pos >= len(data) or data[hdr.pos:hdr.pos + 1] not in _WS:
            raise PgmFormatError("missing whitespace before raster", hdr.pos)
        start = hdr.pos + 1
        raster = data[start:start + n]
        if len(raster) < n:
            raise PgmFormatError(f"truncated raster: expected {n} bytes, found {len(raster)}", start + len(raster))
        vals = np.frombuffer(raster, dtype=np.uint8)
    else:
        vals = np.empty(n, dtype=np.int64)
        for i in range(n):
            try:
                vals[i], at = hdr.token("sample")
            except PgmFormatError as exc:
                raise PgmFormatError(f"truncated raster: sample {i} of {n}", exc.offset) from None
    if vals.max(initial=0) > maxval:
        raise PgmFormatError(f"sample exceeds maxval {maxval}")
    return vals.astype(np.float64).reshape(height, width)


def write_pgm(img, path):
    """Write ``img`` as an 8-bit P5 file (round half up, clamp to 0..255)."""
    img = as_image(img)
    h, w = img.shape
    payload = quantize(img).astype(np.uint8).tobytes()
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (w, h))
        fh.write(payload)


@dataclass(frozen=True)
class SequencePattern:
    directory: str
    template: str
    start: int = 0
    count: int = 1

    def __post_init__(self):
        if self.count < 1:
            raise ParameterError("a sequence needs count >= 1")
        try:
            self.template % 0
        except (TypeError, ValueError):
            raise ParameterError(f"template {self.template!r} needs exactly one integer field like %04d") from None

    def paths(self):
        return [os.path.join(self.directory, self.template % i) for i in range(self.start, self.start + self.count)]


def parse_pattern(text):
    """Parse ``path_%03d.pgm:start:count`` into a :class:`SequencePattern`."""
    parts = text.rsplit(":", 2)
    if len(parts) != 3:
        raise ParameterError(f"sequence {text!r} is not of the form template:start:count")
    path, start, count = parts
    try:
        start, count = int(start), int(count)
    except ValueError:
        raise ParameterError(f"sequence {text!r}: start and count must be integers") from None
    return SequencePattern(os.path.dirname(path), os.path.basename(path), start, count)


def load_sequence(pat):
    """Read all frames of ``pat`` in index order as a ``(T, h, w)`` array."""
    frames = []
    for idx, path in zip(range(pat.start, pat.start + pat.count), pat.paths()):
        if not os.path.exists(path):
            raise FileNotFoundError(f"frame {idx} missing: {path}")
        img = read_pgm(path)
        if frames and img.shape != frames[0].shape:
            raise PgmFormatError(f"frame {idx} ({path}) is {img.shape[1]}x{img.shape[0]}, "
                                 f"expected {frames[0].shape[1]}x{frames[0].shape[0]}")
        frames.append(img)
    return np.stack(frames)


def save_sequence(frames, pat):
    for img, path in zip(frames, pat.paths()):
        write_pgm(img, path)
