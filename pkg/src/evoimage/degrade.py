"""Synthetic degradations for benchmarking: fog, blur, and noise.

These live outside the transform registry on purpose — the search must
not be able to "un-degrade" an image by inverting a known degradation op.
"""

from __future__ import annotations

import numpy as np

from ._filters import gaussian_blur
from .errors import ParamOutOfRange
from .image import Image

__all__ = ["degrade", "DEGRADE_KINDS"]

DEGRADE_KINDS = ("fog", "blur", "noise")


def degrade(image: Image, kind: str, strength: float, seed: int = 0) -> Image:
    """Apply one synthetic degradation.

    fog: blend toward white, strength in [0, 1].
    blur: Gaussian with sigma = strength pixels, in (0, 5].
    noise: additive Gaussian with sigma = strength intensity units, in
    (0, 0.3], drawn from a generator seeded with `seed`.
    """
    arr = image.data
    if kind == "fog":
        if not 0.0 <= strength <= 1.0:
            raise ParamOutOfRange(f"fog strength {strength} outside [0, 1]")
        out = (1.0 - strength) * arr + strength
    elif kind == "blur":
        if not 0.0 < strength <= 5.0:
            raise ParamOutOfRange(f"blur sigma {strength} outside (0, 5]")
        out = np.stack(
            [gaussian_blur(arr[:, :, c], strength) for c in range(arr.shape[2])],
            axis=2,
        )
    elif kind == "noise":
        if not 0.0 < strength <= 0.3:
            raise ParamOutOfRange(f"noise sigma {strength} outside (0, 0.3]")
        rng = np.random.default_rng(seed)
        out = arr + rng.normal(0.0, strength, size=arr.shape)
    else:
        raise ParamOutOfRange(f"unknown degradation {kind!r}")
    return Image(np.clip(out, 0.0, 1.0))
