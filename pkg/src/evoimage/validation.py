"""Input validation helpers used across the package and by the estimator."""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, DimensionMismatch
from .image import Image


def as_image(x) -> Image:
    """Coerce an Image or an (h, w[, c]) array-like into an Image.

    Raises ValueError for out-of-range intensities and DimensionError for
    unsupported shapes, so estimator users get actionable messages.
    """
    if isinstance(x, Image):
        return x
    return Image(np.asarray(x, dtype=np.float64))


def check_same_shape(a: Image, b: Image, what: str = "operation") -> None:
    if a.data.shape != b.data.shape:
        raise DimensionMismatch(
            f"{what} needs matching images, got "
            f"{a.height}x{a.width}x{a.channels} vs {b.height}x{b.width}x{b.channels}"
        )


def check_min_side(image: Image, min_side: int, what: str) -> None:
    if min(image.width, image.height) < min_side:
        raise DimensionError(
            f"{what} needs min side >= {min_side}, got {image.height}x{image.width}"
        )


def check_is_fitted(estimator, attribute: str) -> None:
    if not hasattr(estimator, attribute):
        raise AttributeError(
            f"{type(estimator).__name__} is not fitted yet; call fit() first"
        )
