"""Low-level array helpers shared by transforms and metrics.

Everything here operates on bare 2-D float64 arrays. Border handling is
symmetric reflection (edge pixel repeated), matching scipy.ndimage's
"reflect" mode.
"""

import math

import numpy as np
from scipy import ndimage

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


def quantize_u8(arr: np.ndarray) -> np.ndarray:
    """Map [0,1] floats to 8-bit levels with round-half-up."""
    return np.floor(arr * 255.0 + 0.5).astype(np.uint8)


def luma2d(arr: np.ndarray) -> np.ndarray:
    """Rec.601 luma of an (h, w, c) array as an (h, w) array."""
    if arr.shape[2] == 1:
        return arr[:, :, 0].copy()
    return np.clip(arr @ LUMA_WEIGHTS, 0.0, 1.0)


def gaussian_kernel1d(sigma: float, radius: int | None = None) -> np.ndarray:
    """Normalized 1-D Gaussian taps; default radius is ceil(3*sigma)."""
    if radius is None:
        radius = int(math.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def convolve1d_reflect(arr: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    return ndimage.correlate1d(arr, kernel, axis=axis, mode="reflect")


def gaussian_blur(arr: np.ndarray, sigma: float, radius: int | None = None) -> np.ndarray:
    """Separable Gaussian blur of a 2-D array, reflected borders."""
    k = gaussian_kernel1d(sigma, radius)
    out = ndimage.correlate1d(arr, k, axis=0, mode="reflect")
    return ndimage.correlate1d(out, k, axis=1, mode="reflect")


def local_gaussian_moments(arr: np.ndarray, sigma: float, radius: int):
    """Windowed mean and standard deviation under a Gaussian weight."""
    mu = gaussian_blur(arr, sigma, radius)
    ex2 = gaussian_blur(arr * arr, sigma, radius)
    var = np.maximum(ex2 - mu * mu, 0.0)
    return mu, np.sqrt(var)


def box3_valid_mean(arr: np.ndarray) -> np.ndarray:
    """Mean over 3x3 windows fully inside arr; output loses a 1-pixel rim."""
    s = arr[:-2] + arr[1:-1] + arr[2:]
    s = s[:, :-2] + s[:, 1:-1] + s[:, 2:]
    return s / 9.0


def box_resample(arr: np.ndarray, new_h: int, new_w: int) -> np.ndarray:
    """Area-weighted (box filter) resample of an (h, w, c) array."""
    return _box_axis(_box_axis(arr, new_h, 0), new_w, 1)


def _box_axis(arr: np.ndarray, new_len: int, axis: int) -> np.ndarray:
    old_len = arr.shape[axis]
    if new_len == old_len:
        return arr
    # weight[i, j] = overlap of target cell i with source cell j
    scale = old_len / new_len
    weights = np.zeros((new_len, old_len))
    for i in range(new_len):
        lo = i * scale
        hi = (i + 1) * scale
        j0 = int(math.floor(lo))
        j1 = min(int(math.ceil(hi)), old_len)
        for j in range(j0, j1):
            weights[i, j] = min(hi, j + 1) - max(lo, j)
    weights /= weights.sum(axis=1, keepdims=True)
    moved = np.moveaxis(arr, axis, 0)
    out = np.tensordot(weights, moved, axes=(1, 0))
    return np.moveaxis(out, 0, axis)


def splitmix64(x: int) -> int:
    """One splitmix64 step; used to derive independent per-item seeds."""
    mask = (1 << 64) - 1
    x = (x + 0x9E3779B97F4A7C15) & mask
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & mask
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & mask
    return x ^ (x >> 31)
