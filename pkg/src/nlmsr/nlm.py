"""Classic nonlocal-means denoising.

Each output pixel is the normalized weighted average of the pixels in its
search window.  A neighbour's weight is the product of a radiometric factor,
``exp(-SSD / (2 sigma_r^2))`` over the two ``q x q`` patches, and a geometric
factor, a Gaussian in pixel distance truncated at ``search_radius``.
"""

from dataclasses import dataclass
import math

from . import _backend
from .imgcore import as_image, check_odd, extract_patch, patch_ssd
from .errors import ContractError, ParameterError

__all__ = ["NlmParams", "geometric_factor", "nlm_weight", "nlm_denoise"]


@dataclass(frozen=True)
class NlmParams:
    """Patch size ``q``, search radius, and the two bandwidths.

    ``sigma_s`` defaults to half the search radius.
    """

    q: int = 7
    search_radius: int = 10
    sigma_r: float = 70.0
    sigma_s: float = None

    def __post_init__(self):
        check_odd(self.q)
        if int(self.search_radius) != self.search_radius or self.search_radius < 0:
            raise ParameterError("search_radius must be a nonnegative integer")
        if self.sigma_s is None:
            object.__setattr__(self, "sigma_s", max(self.search_radius / 2.0, 0.5))
        if not (self.sigma_r > 0 and self.sigma_s > 0):
            raise ParameterError("sigma_r and sigma_s must be positive")

    @classmethod
    def for_noise(cls, noise_sigma, q=7, search_radius=10, strength=1.0):
        """Parameters whose radiometric bandwidth scales with the noise level.

        Two patches of identical content differ by ``2 q^2 noise_sigma^2`` in
        expected SSD; ``sigma_r = strength * q * noise_sigma`` puts their
        weight near ``exp(-1 / strength^2)``.  The default ``sigma_r`` of 70
        is this rule at ``q = 7``, ``noise_sigma = 10``.
        """
        if noise_sigma <= 0:
            raise ParameterError("noise_sigma must be positive")
        return cls(q=q, search_radius=search_radius, sigma_r=strength * q * noise_sigma)


def geometric_factor(d2, sigma_s, search_radius):
    """Truncated Gaussian in squared distance ``d2``; zero beyond the radius."""
    if d2 > search_radius * search_radius:
        return 0.0
    return math.exp(-float(d2) / (2.0 * sigma_s * sigma_s))


def _check_inside(img, rc):
    h, w = img.shape
    if not (0 <= rc[0] < h and 0 <= rc[1] < w):
        raise ContractError(f"coordinate {rc} outside {h}x{w} image")


def nlm_weight(img, kl, ij, p):
    """Weight of pixel ``ij`` in the average that produces pixel ``kl``."""
    img = as_image(img)
    _check_inside(img, kl)
    _check_inside(img, ij)
    d2 = (kl[0] - ij[0]) ** 2 + (kl[1] - ij[1]) ** 2
    f = geometric_factor(d2, p.sigma_s, p.search_radius)
    if f == 0.0:
        return 0.0
    ssd = patch_ssd(extract_patch(img, kl, p.q), extract_patch(img, ij, p.q))
    return math.exp(-ssd / (2.0 * p.sigma_r * p.sigma_r)) * f


def nlm_denoise(img, p, threads=1):
    """Denoise ``img``; the self weight is 1 so every denominator is at least 1."""
    img = as_image(img)
    return _backend.kernels().nlm_filter(img, p.q, p.search_radius, p.sigma_r, p.sigma_s, threads)
