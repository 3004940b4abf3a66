"""Registry of parameterized image transformations the search samples from.

Every transform is deterministic and pure: equal inputs produce
byte-identical output buffers. Parameters are carried by TransformSpec,
which is also the serialization unit of the trace format.

Channel handling is per-op:
  * per-channel ops run independently on each channel,
  * luma ops run on Rec.601 luma, chroma preserved by scaling each RGB
    channel with y'/max(y, 1/255),
  * rgb ops see the full (h, w, 3) buffer (and, for the stacking pair,
    the search's initial image).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import ndimage

from ._filters import (
    box3_valid_mean,
    gaussian_blur,
    luma2d,
    quantize_u8,
)
from .errors import DimensionError, ParamOutOfRange, UnknownOp
from .image import Image
from .validation import check_same_shape

__all__ = [
    "TransformSpec",
    "TransformRegistryEntry",
    "ParamRange",
    "REGISTRY",
    "registry_ops",
    "validate_spec",
    "apply_transform",
    "stack_weighted",
    "tv_denoise",
    "sharpen",
    "clahe",
    "dehaze_dark_channel",
]

SQRT2 = math.sqrt(2.0)


# --------------------------------------------------------------------------
# spec + registry types

@dataclass(frozen=True)
class TransformSpec:
    """A named, fully parameterized transformation step."""

    op: str
    params: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class ParamRange:
    name: str
    lo: float
    hi: float
    integer: bool = False


@dataclass(frozen=True)
class TransformRegistryEntry:
    op: str
    params: tuple[ParamRange, ...]
    channel_mode: str  # "per_channel" | "luma" | "rgb"
    fn: Callable
    uses_initial: bool = False


# --------------------------------------------------------------------------
# kernels on bare arrays

def _gaussian_denoise(ch, sigma):
    return np.clip(gaussian_blur(ch, sigma), 0.0, 1.0)


def _median_denoise(ch, radius):
    size = 2 * int(radius) + 1
    return ndimage.median_filter(ch, size=size, mode="reflect")


def _bilateral_denoise(ch, sigma_s, sigma_r):
    radius = int(math.ceil(2.0 * sigma_s))
    h, w = ch.shape
    padded = np.pad(ch, radius, mode="symmetric")
    num = np.zeros_like(ch)
    den = np.zeros_like(ch)
    inv2ss = 1.0 / (2.0 * sigma_s * sigma_s)
    inv2sr = 1.0 / (2.0 * sigma_r * sigma_r)
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            shifted = padded[radius + dy : radius + dy + h, radius + dx : radius + dx + w]
            wgt = math.exp(-(dy * dy + dx * dx) * inv2ss) * np.exp(
                -((shifted - ch) ** 2) * inv2sr
            )
            num += wgt * shifted
            den += wgt
    return np.clip(num / den, 0.0, 1.0)


def _tv_grad(a):
    g = np.zeros((2,) + a.shape)
    g[0, :-1, :] = a[1:, :] - a[:-1, :]
    g[1, :, :-1] = a[:, 1:] - a[:, :-1]
    return g


def _tv_div(p):
    py, px = p
    d = np.empty_like(py)
    d[0, :] = py[0, :]
    d[1:-1, :] = py[1:-1, :] - py[:-2, :]
    d[-1, :] = -py[-2, :]
    e = np.empty_like(px)
    e[:, 0] = px[:, 0]
    e[:, 1:-1] = px[:, 1:-1] - px[:, :-2]
    e[:, -1] = -px[:, -2]
    return d + e


def _tv_denoise(ch, weight, iterations=50, step=0.25):
    # Dual projection for argmin_u 0.5*||u - f||^2 + weight*TV(u)
    if weight <= 0.0:
        return ch.copy()
    p = np.zeros((2,) + ch.shape)
    scaled = ch / weight
    for _ in range(iterations):
        g = _tv_grad(_tv_div(p) - scaled)
        mag = np.sqrt(g[0] ** 2 + g[1] ** 2)
        p = (p + step * g) / (1.0 + step * mag)
    return np.clip(ch - weight * _tv_div(p), 0.0, 1.0)


def _nlm_denoise(ch, h):
    # 3x3 patches compared over a 7x7 search window; w = exp(-d2/h^2)
    # where d2 is the mean squared patch difference.
    rows, cols = ch.shape
    pad4 = np.pad(ch, 4, mode="symmetric")
    center1 = pad4[3 : 3 + rows + 2, 3 : 3 + cols + 2]
    num = np.zeros_like(ch)
    den = np.zeros_like(ch)
    inv_h2 = 1.0 / (h * h)
    for dy in range(-3, 4):
        for dx in range(-3, 4):
            shifted1 = pad4[3 + dy : 3 + dy + rows + 2, 3 + dx : 3 + dx + cols + 2]
            d2 = box3_valid_mean((shifted1 - center1) ** 2)
            wgt = np.exp(-d2 * inv_h2)
            num += wgt * shifted1[1 : 1 + rows, 1 : 1 + cols]
            den += wgt
    return np.clip(num / den, 0.0, 1.0)


def _haar_fwd2(a):
    lo = (a[0::2, :] + a[1::2, :]) / SQRT2
    hi = (a[0::2, :] - a[1::2, :]) / SQRT2
    ll = (lo[:, 0::2] + lo[:, 1::2]) / SQRT2
    hl = (lo[:, 0::2] - lo[:, 1::2]) / SQRT2
    lh = (hi[:, 0::2] + hi[:, 1::2]) / SQRT2
    hh = (hi[:, 0::2] - hi[:, 1::2]) / SQRT2
    return ll, hl, lh, hh


def _haar_inv2(ll, hl, lh, hh):
    h2, w2 = ll.shape
    lo = np.empty((h2, 2 * w2))
    lo[:, 0::2] = (ll + hl) / SQRT2
    lo[:, 1::2] = (ll - hl) / SQRT2
    hi = np.empty((h2, 2 * w2))
    hi[:, 0::2] = (lh + hh) / SQRT2
    hi[:, 1::2] = (lh - hh) / SQRT2
    out = np.empty((2 * h2, 2 * w2))
    out[0::2, :] = (lo + hi) / SQRT2
    out[1::2, :] = (lo - hi) / SQRT2
    return out


def _soft(x, t):
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def _wavelet_denoise(ch, threshold):
    # 2-level Haar; soft-threshold every detail band, keep the coarse band.
    h, w = ch.shape
    pad_h = (-h) % 4
    pad_w = (-w) % 4
    work = np.pad(ch, ((0, pad_h), (0, pad_w)), mode="symmetric")
    ll1, hl1, lh1, hh1 = _haar_fwd2(work)
    ll2, hl2, lh2, hh2 = _haar_fwd2(ll1)
    ll1 = _haar_inv2(ll2, _soft(hl2, threshold), _soft(lh2, threshold), _soft(hh2, threshold))
    out = _haar_inv2(ll1, _soft(hl1, threshold), _soft(lh1, threshold), _soft(hh1, threshold))
    return np.clip(out[:h, :w], 0.0, 1.0)


def _hist_equalize(y):
    q = quantize_u8(y)
    hist = np.bincount(q.ravel(), minlength=256).astype(np.float64)
    cdf = np.cumsum(hist) / q.size
    return cdf[q]


_CLAHE_GRID = 8
_CLAHE_BINS = 256


def _interp_axis(length, centers):
    pos = np.arange(length, dtype=np.float64)
    idx = np.clip(np.searchsorted(centers, pos, side="right") - 1, 0, len(centers) - 1)
    upper = np.minimum(idx + 1, len(centers) - 1)
    span = centers[upper] - centers[idx]
    frac = np.where(span > 0, (pos - centers[idx]) / np.where(span > 0, span, 1.0), 0.0)
    return idx, upper, np.clip(frac, 0.0, 1.0)


def _clahe(y, clip_limit):
    h, w = y.shape
    if h < 2 * _CLAHE_GRID or w < 2 * _CLAHE_GRID:
        raise DimensionError(f"clahe needs at least 16x16 pixels, got {h}x{w}")
    ys = [(i * h) // _CLAHE_GRID for i in range(_CLAHE_GRID + 1)]
    xs = [(j * w) // _CLAHE_GRID for j in range(_CLAHE_GRID + 1)]
    q = quantize_u8(y).astype(np.intp)
    maps = np.empty((_CLAHE_GRID, _CLAHE_GRID, _CLAHE_BINS))
    for ti in range(_CLAHE_GRID):
        for tj in range(_CLAHE_GRID):
            tile = q[ys[ti] : ys[ti + 1], xs[tj] : xs[tj + 1]]
            n = tile.size
            hist = np.bincount(tile.ravel(), minlength=_CLAHE_BINS).astype(np.float64)
            clip = clip_limit * n / _CLAHE_BINS
            excess = np.maximum(hist - clip, 0.0).sum()
            hist = np.minimum(hist, clip) + excess / _CLAHE_BINS
            maps[ti, tj] = np.cumsum(hist) / n
    cy = np.array([(ys[i] + ys[i + 1] - 1) / 2.0 for i in range(_CLAHE_GRID)])
    cx = np.array([(xs[j] + xs[j + 1] - 1) / 2.0 for j in range(_CLAHE_GRID)])
    r0, r1, wy = _interp_axis(h, cy)
    c0, c1, wx = _interp_axis(w, cx)
    r0 = r0[:, None]
    r1 = r1[:, None]
    wy = wy[:, None]
    c0 = c0[None, :]
    c1 = c1[None, :]
    wx = wx[None, :]
    v00 = maps[r0, c0, q]
    v01 = maps[r0, c1, q]
    v10 = maps[r1, c0, q]
    v11 = maps[r1, c1, q]
    out = (1 - wy) * ((1 - wx) * v00 + wx * v01) + wy * ((1 - wx) * v10 + wx * v11)
    return np.clip(out, 0.0, 1.0)


def _brightness_contrast(ch, alpha, beta_shift):
    return np.clip(alpha * (ch - 0.5) + 0.5 + beta_shift, 0.0, 1.0)


def _gamma(ch, g):
    return np.clip(ch**g, 0.0, 1.0)


def _sharpen(y, beta):
    if beta == 0.0:
        return y
    return np.clip(y + beta * (y - gaussian_blur(y, 1.0)), 0.0, 1.0)


def _background_suppress(y, sigma_bg):
    bg = gaussian_blur(y, sigma_bg)
    return np.clip(y - bg + bg.mean(), 0.0, 1.0)


def _erode(ch, radius):
    return ndimage.minimum_filter(ch, size=2 * int(radius) + 1, mode="reflect")


def _dilate(ch, radius):
    return ndimage.maximum_filter(ch, size=2 * int(radius) + 1, mode="reflect")


def _dehaze(arr, omega):
    h, w = arr.shape[:2]
    dark = ndimage.minimum_filter(arr.min(axis=2), size=15, mode="reflect")
    if dark.max() - dark.min() < 1e-12:
        # Degenerate atmosphere estimate (constant dark channel): identity.
        return arr.copy()
    n_top = max(1, int(round(0.001 * h * w)))
    order = np.argsort(dark.ravel(), kind="stable")
    atmos = arr.reshape(-1, 3)[order[-n_top:]].mean(axis=0)
    atmos = np.maximum(atmos, 1e-6)
    transmission = 1.0 - omega * ndimage.minimum_filter(
        (arr / atmos).min(axis=2), size=15, mode="reflect"
    )
    transmission = np.maximum(transmission, 0.1)
    out = (arr - atmos) / transmission[:, :, None] + atmos
    return np.clip(out, 0.0, 1.0)


def _stack_initial(arr, initial, weight):
    if weight == 1.0:
        return arr.copy()
    if weight == 0.0:
        return initial.copy()
    return np.clip(weight * arr + (1.0 - weight) * initial, 0.0, 1.0)


def _subtract_initial(arr, initial, amount):
    return np.clip(arr - amount * initial + amount * initial.mean(), 0.0, 1.0)


# --------------------------------------------------------------------------
# registry

def _entry(op, mode, fn, *params, uses_initial=False):
    return TransformRegistryEntry(op, params, mode, fn, uses_initial)


_ENTRIES = (
    _entry("gaussian_denoise", "per_channel", _gaussian_denoise, ParamRange("sigma", 0.5, 2.0)),
    _entry("median_denoise", "per_channel", _median_denoise, ParamRange("radius", 1, 2, integer=True)),
    _entry(
        "bilateral_denoise",
        "per_channel",
        _bilateral_denoise,
        ParamRange("sigma_s", 1.0, 3.0),
        ParamRange("sigma_r", 0.05, 0.25),
    ),
    _entry("tv_denoise", "per_channel", _tv_denoise, ParamRange("weight", 0.02, 0.2)),
    _entry("nlm_denoise", "per_channel", _nlm_denoise, ParamRange("h", 0.02, 0.15)),
    _entry("wavelet_denoise", "per_channel", _wavelet_denoise, ParamRange("threshold", 0.01, 0.1)),
    _entry("hist_equalize", "luma", _hist_equalize),
    _entry("clahe", "luma", _clahe, ParamRange("clip_limit", 1.0, 4.0)),
    _entry(
        "brightness_contrast",
        "per_channel",
        _brightness_contrast,
        ParamRange("alpha", 0.8, 1.3),
        ParamRange("beta_shift", -0.1, 0.1),
    ),
    _entry("gamma", "per_channel", _gamma, ParamRange("g", 0.6, 1.6)),
    _entry("sharpen", "luma", _sharpen, ParamRange("beta", 0.5, 1.5)),
    _entry("dehaze", "rgb", _dehaze, ParamRange("omega", 0.75, 0.95)),
    _entry("background_suppress", "luma", _background_suppress, ParamRange("sigma_bg", 10.0, 40.0)),
    _entry("erode", "per_channel", _erode, ParamRange("radius", 1, 2, integer=True)),
    _entry("dilate", "per_channel", _dilate, ParamRange("radius", 1, 2, integer=True)),
    _entry(
        "stack_initial",
        "rgb",
        _stack_initial,
        ParamRange("weight", 0.3, 0.95),
        uses_initial=True,
    ),
    _entry(
        "subtract_initial",
        "rgb",
        _subtract_initial,
        ParamRange("amount", 0.05, 0.3),
        uses_initial=True,
    ),
)

REGISTRY: dict[str, TransformRegistryEntry] = {e.op: e for e in _ENTRIES}


def registry_ops() -> tuple[str, ...]:
    """Registry op names in declaration order."""
    return tuple(REGISTRY)


def validate_spec(spec: TransformSpec) -> TransformSpec:
    """Check op and parameters against the registry.

    Returns a normalized spec whose params follow registry order, so
    serialized traces are canonical.
    """
    entry = REGISTRY.get(spec.op)
    if entry is None:
        raise UnknownOp(f"unknown transform op {spec.op!r}")
    declared = {p.name for p in entry.params}
    given = set(spec.params)
    if given != declared:
        raise ParamOutOfRange(
            f"{spec.op}: expected params {sorted(declared)}, got {sorted(given)}"
        )
    normalized = {}
    for p in entry.params:
        v = float(spec.params[p.name])
        if not np.isfinite(v) or v < p.lo or v > p.hi:
            raise ParamOutOfRange(
                f"{spec.op}: {p.name}={v} outside [{p.lo}, {p.hi}]"
            )
        if p.integer and v != round(v):
            raise ParamOutOfRange(f"{spec.op}: {p.name}={v} must be an integer")
        normalized[p.name] = v
    return TransformSpec(spec.op, normalized)


# --------------------------------------------------------------------------
# application

def _apply_luma(arr, fn, params):
    y = luma2d(arr)
    y2 = fn(y, **params)
    if y2 is y:
        return arr.copy()
    if arr.shape[2] == 1:
        return np.clip(y2, 0.0, 1.0)[:, :, None]
    ratio = y2 / np.maximum(y, 1.0 / 255.0)
    return np.clip(arr * ratio[:, :, None], 0.0, 1.0)


def apply_transform(spec: TransformSpec, image: Image, initial: Image) -> Image:
    """Apply one registry step; pure and deterministic.

    `initial` is the search's starting image, the fixed operand of the
    stack/subtract ops; it is ignored by every other op.
    """
    spec = validate_spec(spec)
    entry = REGISTRY[spec.op]
    arr = image.data
    if entry.uses_initial:
        check_same_shape(image, initial, spec.op)
        out = entry.fn(arr, initial.data, **spec.params)
    elif entry.channel_mode == "rgb":
        if image.channels != 3:
            raise DimensionError(f"{spec.op} needs a 3-channel image")
        out = entry.fn(arr, **spec.params)
    elif entry.channel_mode == "luma":
        out = _apply_luma(arr, entry.fn, spec.params)
    else:
        out = np.stack(
            [entry.fn(arr[:, :, c], **spec.params) for c in range(arr.shape[2])],
            axis=2,
        )
    return Image(np.clip(out, 0.0, 1.0))


# --------------------------------------------------------------------------
# public single ops (the search-independent surface)

def stack_weighted(a: Image, b: Image, w: float) -> Image:
    """Convex blend w*a + (1-w)*b, clamped; w in [0, 1]."""
    if not 0.0 <= w <= 1.0:
        raise ParamOutOfRange(f"stack weight {w} outside [0, 1]")
    check_same_shape(a, b, "stack_weighted")
    if w == 1.0:
        return Image(a.data)
    if w == 0.0:
        return Image(b.data)
    return Image(np.clip(w * a.data + (1.0 - w) * b.data, 0.0, 1.0))


def tv_denoise(channel: Image, weight: float) -> Image:
    """Total-variation smoothing via 50 dual-projection iterations, step 0.25."""
    if channel.channels != 1:
        raise DimensionError("tv_denoise expects a 1-channel image")
    if weight < 0.0:
        raise ParamOutOfRange(f"tv weight {weight} must be >= 0")
    return Image(_tv_denoise(channel.data[:, :, 0], weight))


def sharpen(luma: Image, beta: float) -> Image:
    """Unsharp masking: v + beta*(v - gaussian(v, sigma=1)), clamped."""
    if luma.channels != 1:
        raise DimensionError("sharpen expects a 1-channel image")
    y = luma.data[:, :, 0]
    out = _sharpen(y, beta)
    return Image(luma.data) if out is y else Image(out)


def clahe(luma: Image, clip_limit: float) -> Image:
    """Contrast-limited adaptive equalization on an 8x8 tile grid."""
    if luma.channels != 1:
        raise DimensionError("clahe expects a 1-channel image")
    if clip_limit < 1.0:
        raise ParamOutOfRange(f"clip_limit {clip_limit} must be >= 1")
    return Image(_clahe(luma.data[:, :, 0], clip_limit))


def dehaze_dark_channel(image: Image, omega: float) -> Image:
    """Dark-channel-prior dehazing; omega is the haze retention in (0, 1]."""
    if image.channels != 3:
        raise DimensionError("dehaze expects a 3-channel image")
    if not 0.0 < omega <= 1.0:
        raise ParamOutOfRange(f"omega {omega} outside (0, 1]")
    return Image(_dehaze(image.data, omega))
