"""Pixel buffer type, codecs, color conversion, hashing, and resampling.

Images are immutable (h, w, c) float64 buffers with intensities in [0, 1]
and 1 or 3 channels. Quantization to 8 bits happens only at the codec and
hash boundaries, always with round-half-up.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import PIL.Image

from ._filters import box_resample, luma2d, quantize_u8
from .errors import DecodeError, DimensionError, ImageIOError

__all__ = [
    "Image",
    "load_image",
    "save_image",
    "to_luma",
    "content_hash",
    "downscale_half",
    "scale_to_max_side",
]


@dataclass(frozen=True)
class Image:
    """Immutable planar image: (height, width, channels) float64 in [0, 1]."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, np.newaxis]
        if arr.ndim != 3:
            raise DimensionError(f"expected 2-D or 3-D buffer, got ndim={arr.ndim}")
        h, w, c = arr.shape
        if h < 1 or w < 1:
            raise DimensionError(f"empty image ({h}x{w})")
        if c not in (1, 3):
            raise DimensionError(f"channels must be 1 or 3, got {c}")
        if not np.isfinite(arr).all():
            raise ValueError("image contains non-finite values")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("image intensities must lie in [0, 1]")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    def same_shape(self, other: "Image") -> bool:
        return self.data.shape == other.data.shape


def load_image(path) -> Image:
    """Load a PNG or JPEG file as a 3-channel image with intensities v/255.

    Grayscale sources are replicated across channels; alpha is dropped.
    """
    p = Path(path)
    try:
        handle = PIL.Image.open(p)
    except FileNotFoundError as exc:
        raise ImageIOError(f"no such file: {p}") from exc
    except PIL.UnidentifiedImageError as exc:
        raise DecodeError(f"not a decodable image: {p}") from exc
    except IsADirectoryError as exc:
        raise ImageIOError(f"is a directory: {p}") from exc
    except OSError as exc:
        raise ImageIOError(f"cannot read {p}: {exc}") from exc
    with handle:
        if handle.format not in ("PNG", "JPEG"):
            raise DecodeError(f"unsupported format {handle.format!r}: {p}")
        try:
            rgb = handle.convert("RGB")
        except OSError as exc:
            raise DecodeError(f"corrupt image data: {p}") from exc
    arr = np.asarray(rgb, dtype=np.float64) / 255.0
    return Image(arr)


def save_image(image: Image, path) -> None:
    """Write an 8-bit PNG (gray or RGB); quantization is round-half-up."""
    p = Path(path)
    if not p.parent.is_dir():
        raise ImageIOError(f"parent directory does not exist: {p.parent}")
    q = quantize_u8(image.data)
    if image.channels == 1:
        pil = PIL.Image.fromarray(q[:, :, 0], mode="L")
    else:
        pil = PIL.Image.fromarray(q, mode="RGB")
    try:
        pil.save(p, format="PNG")
    except OSError as exc:
        raise ImageIOError(f"cannot write {p}: {exc}") from exc


def to_luma(image: Image) -> Image:
    """Rec.601 luma (0.299, 0.587, 0.114); identity copy for 1-channel input."""
    if image.channels == 1:
        return Image(image.data)
    return Image(luma2d(image.data))


def content_hash(image: Image) -> str:
    """SHA-256 over dimensions and the round-half-up quantized samples.

    Encoding: width, height, channels as 8-byte little-endian unsigned
    integers, then one byte per sample in row-major (h, w, c) order. The
    hash therefore survives a PNG round-trip.
    """
    header = struct.pack("<QQQ", image.width, image.height, image.channels)
    body = quantize_u8(image.data).tobytes()
    return hashlib.sha256(header + body).hexdigest()


def downscale_half(image: Image) -> Image:
    """Halve both dimensions; each output pixel is the mean of a 2x2 block."""
    h, w = image.height, image.width
    if h < 2 or w < 2:
        raise DimensionError(f"cannot halve a {h}x{w} image")
    h2, w2 = h // 2, w // 2
    arr = image.data[: 2 * h2, : 2 * w2, :]
    blocks = arr.reshape(h2, 2, w2, 2, image.channels)
    return Image(np.clip(blocks.mean(axis=(1, 3)), 0.0, 1.0))


def scale_to_max_side(image: Image, max_side: int) -> Image:
    """Box-filter downscale so the longest side equals max_side.

    Aspect ratio is preserved; images already small enough are returned
    unchanged.
    """
    longest = max(image.width, image.height)
    if longest <= max_side:
        return image
    scale = max_side / longest
    new_h = max(1, round(image.height * scale))
    new_w = max(1, round(image.width * scale))
    out = box_resample(image.data, new_h, new_w)
    return Image(np.clip(out, 0.0, 1.0))
