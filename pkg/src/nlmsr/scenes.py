"""Deterministic synthetic ground-truth images (intensities in [0, 255])."""

import numpy as np

__all__ = ["smooth_scene", "test_scene"]


def _grid(size):
    y, x = np.mgrid[0:size, 0:size] / float(size)
    return y, x


def smooth_scene(size=64):
    """Slow gradients and broad blobs; no edges."""
    y, x = _grid(size)
    img = 60 + 80 * x + 40 * y
    img += 60 * np.exp(-((x - 0.35) ** 2 + (y - 0.4) ** 2) / 0.02)
    img -= 40 * np.exp(-((x - 0.75) ** 2 + (y - 0.7) ** 2) / 0.03)
    img += 15 * np.sin(2 * np.pi * 1.5 * x) * np.cos(2 * np.pi * y)
    return np.clip(img, 0, 255)


def test_scene(size=128):
    """Soft-edged shapes, shading and a band of fine oscillation.

    Mixes flat regions, curved edges and texture near the resolution limit,
    the content on which super-resolution methods differ.
    """
    y, x = _grid(size)
    img = 70 + 50 * x + 30 * np.sin(2 * np.pi * (0.7 * y + 0.2 * x))
    disk = np.hypot(x - 0.3, y - 0.32)
    img += 90 / (1 + np.exp((disk - 0.16) * size / 1.5))
    sq = np.maximum(np.abs(x - 0.72), np.abs(y - 0.3))
    img -= 50 / (1 + np.exp((sq - 0.12) * size / 1.5))
    ring = np.hypot(x - 0.68, y - 0.74)
    img += 40 * np.cos(2 * np.pi * ring * size / 9.0) * np.exp(-((ring / 0.18) ** 2))
    bar = np.exp(-((y - 0.75) ** 2) / 0.004) * (x < 0.45)
    img += 45 * bar * np.sin(2 * np.pi * x * size / 7.0)
    return np.clip(img, 0, 255)
