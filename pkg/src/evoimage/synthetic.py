"""Deterministic synthetic test scenes.

Procedural images with smooth regions, hard edges, and fine texture —
enough natural-scene statistics for the built-in scorer to be meaningful
without shipping photographs. Used by the test suite, the benchmark
examples, and the offline model fit.
"""

from __future__ import annotations

import numpy as np

from ._filters import gaussian_blur
from .image import Image

__all__ = ["synthetic_image", "synthetic_set"]


def _smooth_field(rng, h, w, cells):
    coarse = rng.random((cells, cells))
    ys = np.linspace(0, cells - 1, h)
    xs = np.linspace(0, cells - 1, w)
    y0 = np.minimum(ys.astype(int), cells - 2)
    x0 = np.minimum(xs.astype(int), cells - 2)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    c00 = coarse[y0[:, None], x0[None, :]]
    c01 = coarse[y0[:, None], x0[None, :] + 1]
    c10 = coarse[y0[:, None] + 1, x0[None, :]]
    c11 = coarse[y0[:, None] + 1, x0[None, :] + 1]
    return (1 - fy) * ((1 - fx) * c00 + fx * c01) + fy * ((1 - fx) * c10 + fx * c11)


def synthetic_image(seed: int, size: tuple[int, int] = (128, 128)) -> Image:
    """A procedural scene: tinted smooth background, shapes, mild texture."""
    h, w = size
    rng = np.random.default_rng(seed)
    base = _smooth_field(rng, h, w, 4)
    tint = 0.1 * (rng.random(3) - 0.5)
    img = 0.45 + 0.5 * (base[:, :, None] - 0.5) + tint[None, None, :]

    yy, xx = np.mgrid[0:h, 0:w]
    n_shapes = int(rng.integers(6, 12))
    for _ in range(n_shapes):
        color = rng.random(3) * 0.9 + 0.05
        cy, cx = rng.random() * h, rng.random() * w
        if rng.random() < 0.5:
            ry = 2 + rng.random() * h / 5
            rx = 2 + rng.random() * w / 5
            mask = ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0
        else:
            sy = 2 + rng.random() * h / 4
            sx = 2 + rng.random() * w / 4
            mask = (np.abs(yy - cy) <= sy / 2) & (np.abs(xx - cx) <= sx / 2)
        alpha = 0.6 + 0.4 * rng.random()
        img[mask] = (1 - alpha) * img[mask] + alpha * color[None, :]

    texture = rng.normal(0.0, 0.02, size=(h, w))
    img += gaussian_blur(texture, 0.7)[:, :, None]
    for c in range(3):
        img[:, :, c] = gaussian_blur(img[:, :, c], 0.5)
    return Image(np.clip(img, 0.0, 1.0))


def synthetic_set(count: int, size: tuple[int, int] = (128, 128), seed0: int = 0):
    """`count` independent scenes with seeds seed0, seed0+1, ..."""
    return [synthetic_image(seed0 + i, size) for i in range(count)]
