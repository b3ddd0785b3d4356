"""Nonlocal-means weights inside a local polynomial regression.

At each pixel the samples are the pixels of the search window, placed at
their integer offsets from the centre and weighted by the nonlocal-means
kernel (patch similarity times truncated spatial Gaussian).  An order-N
Taylor model is fitted by weighted least squares and its constant term is the
output.  Order 0 reproduces :func:`nlm.nlm_denoise`.
"""

from dataclasses import dataclass, field
import logging

from . import _backend
from .errors import ParameterError
from .imgcore import as_image
from .kernreg import check_order
from .nlm import NlmParams, nlm_weight

log = logging.getLogger(__name__)

__all__ = ["HonlmParams", "honlm_weight", "honlm_denoise"]


@dataclass(frozen=True)
class HonlmParams:
    nlm: NlmParams = field(default_factory=NlmParams)
    order: int = 2
    ridge: float = 0.0

    def __post_init__(self):
        check_order(self.order)
        if self.ridge < 0:
            raise ParameterError("ridge must be >= 0")


def honlm_weight(img, center, neighbor, p):
    return nlm_weight(img, center, neighbor, p.nlm)


def honlm_denoise(img, p, threads=1, return_fallbacks=False):
    """Order-``p.order`` nonlocal regression of every pixel.

    Pixels whose normal matrix is numerically singular get the order-0
    estimate instead; their count is returned when ``return_fallbacks`` is set.
    """
    img = as_image(img)
    n = p.nlm
    out, nfb = _backend.kernels().nonlocal_fit(
        img, n.q, n.search_radius, n.sigma_r, n.sigma_s, p.order, p.ridge, threads
    )
    if nfb:
        log.debug("honlm: %d of %d pixels fell back to order 0", nfb, img.size)
    if return_fallbacks:
        return out, nfb
    return out
