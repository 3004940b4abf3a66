"""Quality scoring that drives the search.

Built-in no-reference score: a BRISQUE-style pipeline (MSCN coefficients,
generalized-Gaussian fits over two scales) feeding a linear model loaded
from a JSON file. Also here: SSIM (the similarity guard), a fast noise
standard-deviation estimate, and a subprocess protocol for plugging in
external scorers such as neural IQA models.
"""

from __future__ import annotations

import json
import math
import shlex
import subprocess
import tempfile
import threading
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from scipy import ndimage
from scipy.special import gammaln

from ._filters import gaussian_kernel1d, local_gaussian_moments, quantize_u8
from .errors import (
    ConfigError,
    DegenerateInput,
    DimensionError,
    ScorerParseError,
    ScorerProcessError,
    ScorerTimeout,
)
from .image import Image, downscale_half, save_image, scale_to_max_side, to_luma
from .validation import check_min_side, check_same_shape

__all__ = [
    "QualityScore",
    "ScorerConfig",
    "BrisqueModel",
    "mscn",
    "fit_ggd",
    "fit_aggd",
    "brisque_features",
    "brisque_score",
    "load_default_model",
    "ssim",
    "noise_variance",
    "external_score",
    "make_scorer",
    "set_external_concurrency",
]

HIGHER_BETTER = "higher_better"
LOWER_BETTER = "lower_better"

MSCN_C = 1.0 / 255.0
_MSCN_SIGMA = 7.0 / 6.0
_MSCN_RADIUS = 3

# Shape-parameter grid shared by the GGD and AGGD moment-matching fits.
_ALPHA_GRID = np.arange(0.2, 10.0 + 1e-9, 0.001)
_LG1 = gammaln(1.0 / _ALPHA_GRID)
_LG2 = gammaln(2.0 / _ALPHA_GRID)
_LG3 = gammaln(3.0 / _ALPHA_GRID)
# rho(alpha) = gamma(2/a)^2 / (gamma(1/a) * gamma(3/a)), the AGGD statistic
_RHO_AGGD = np.exp(2.0 * _LG2 - _LG1 - _LG3)
# rho(alpha) = gamma(1/a) * gamma(3/a) / gamma(2/a)^2, its GGD reciprocal
_RHO_GGD = np.exp(_LG1 + _LG3 - 2.0 * _LG2)


@dataclass(frozen=True)
class QualityScore:
    """A metric value plus the direction in which it improves."""

    value: float
    orientation: str

    def __post_init__(self):
        if self.orientation not in (HIGHER_BETTER, LOWER_BETTER):
            raise ConfigError(f"bad orientation {self.orientation!r}")
        if not math.isfinite(self.value):
            raise ValueError("quality score must be finite")


@dataclass(frozen=True)
class ScorerConfig:
    """Which quality metric drives the search and how to run it.

    kind is "brisque_builtin" or "external". External scorers are shell
    commands with an {image} placeholder; their stdout must be a single
    decimal number. eval_downscale, when set, caps the longest image side
    (box filter) before scoring only — the SSIM guard always sees full
    resolution.
    """

    kind: str = "brisque_builtin"
    command: str | None = None
    timeout: float = 30.0
    orientation: str = LOWER_BETTER
    eval_downscale: int | None = None

    def validate(self) -> None:
        if self.kind not in ("brisque_builtin", "external"):
            raise ConfigError(f"unknown scorer kind {self.kind!r}")
        if self.orientation not in (HIGHER_BETTER, LOWER_BETTER):
            raise ConfigError(f"bad orientation {self.orientation!r}")
        if self.kind == "external" and not self.command:
            raise ConfigError("external scorer requires a command template")
        if self.eval_downscale is not None and self.eval_downscale < 32:
            raise ConfigError("eval_downscale must be >= 32")
        if self.timeout <= 0:
            raise ConfigError("timeout must be positive")


# --------------------------------------------------------------------------
# MSCN + distribution fits

def mscn(luma: Image) -> np.ndarray:
    """Mean-subtracted contrast-normalized coefficients of a luma image.

    Local mean and std use a 7x7 Gaussian window (sigma 7/6, normalized),
    reflected borders; the stabilizer C is 1/255. Returns a bare (h, w)
    float array — values are unbounded.
    """
    if luma.channels != 1:
        raise DimensionError("mscn expects a 1-channel image")
    check_min_side(luma, 16, "mscn")
    y = luma.data[:, :, 0]
    if y.max() == y.min():
        # sigma = 0 and numerator = 0 exactly; skip the float residue
        return np.zeros_like(y)
    mu, sigma = local_gaussian_moments(y, _MSCN_SIGMA, _MSCN_RADIUS)
    return (y - mu) / (sigma + MSCN_C)


def _check_samples(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size < 16:
        raise DegenerateInput(f"need at least 16 samples, got {x.size}")
    if x.max() == x.min():
        raise DegenerateInput("samples are constant")
    return x


def fit_ggd(samples) -> tuple[float, float]:
    """Symmetric generalized-Gaussian moment fit: (shape alpha, variance)."""
    x = _check_samples(samples)
    mean_sq = np.mean(x * x)
    mean_abs = np.mean(np.abs(x))
    rho = mean_sq / max(mean_abs * mean_abs, 1e-300)
    alpha = _ALPHA_GRID[int(np.argmin(np.abs(_RHO_GGD - rho)))]
    return float(alpha), float(mean_sq)


def fit_aggd(samples) -> tuple[float, float, float, float]:
    """Asymmetric generalized-Gaussian moment fit.

    Returns (alpha, sigma_l, sigma_r, eta) where the sigmas come from the
    one-sided second moments, alpha from grid search over
    gamma(2/a)^2/(gamma(1/a)gamma(3/a)), and
    eta = (sigma_r - sigma_l) * gamma(2/alpha)/gamma(1/alpha).
    """
    x = _check_samples(samples)
    left = x[x < 0]
    right = x[x > 0]
    sigma_l = math.sqrt(np.mean(left * left)) if left.size else 0.0
    sigma_r = math.sqrt(np.mean(right * right)) if right.size else 0.0
    gamma_hat = sigma_l / max(sigma_r, 1e-300)
    mean_abs = np.mean(np.abs(x))
    mean_sq = np.mean(x * x)
    r_hat = (mean_abs * mean_abs) / max(mean_sq, 1e-300)
    big_r = r_hat * (gamma_hat**3 + 1.0) * (gamma_hat + 1.0) / (gamma_hat**2 + 1.0) ** 2
    idx = int(np.argmin(np.abs(_RHO_AGGD - big_r)))
    alpha = float(_ALPHA_GRID[idx])
    eta = (sigma_r - sigma_l) * math.exp(
        math.lgamma(2.0 / alpha) - math.lgamma(1.0 / alpha)
    )
    return alpha, float(sigma_l), float(sigma_r), float(eta)


_PAIR_SHIFTS = (
    ("h", (0, 1)),
    ("v", (1, 0)),
    ("d1", (1, 1)),
    ("d2", (1, -1)),
)


def _pair_products(coeffs: np.ndarray, shift: tuple[int, int]) -> np.ndarray:
    dy, dx = shift
    h, w = coeffs.shape
    if dx >= 0:
        a = coeffs[: h - dy, : w - dx]
        b = coeffs[dy:, dx:]
    else:
        a = coeffs[: h - dy, -dx:]
        b = coeffs[dy:, : w + dx]
    return (a * b).ravel()


def brisque_features(luma: Image) -> np.ndarray:
    """36-vector of natural-scene statistics over two scales.

    Per scale: GGD fit of the MSCN map (alpha, variance), then an AGGD fit
    (alpha, eta, sigma_l^2, sigma_r^2) of the horizontal, vertical and two
    diagonal neighboring-coefficient products. Scale 2 is the half-size
    image (2x2 block means).
    """
    check_min_side(luma, 32, "brisque_features")
    feats: list[float] = []
    img = luma
    for _ in range(2):
        coeffs = mscn(img)
        alpha, variance = fit_ggd(coeffs.ravel())
        feats.extend([alpha, variance])
        for _, shift in _PAIR_SHIFTS:
            a, sl, sr, eta = fit_aggd(_pair_products(coeffs, shift))
            feats.extend([a, eta, sl * sl, sr * sr])
        img = downscale_half(img)
    return np.array(feats)


# --------------------------------------------------------------------------
# linear scoring model

@dataclass(frozen=True)
class BrisqueModel:
    """Linear model on standardized features: 36 means/scales/weights + bias."""

    means: np.ndarray
    scales: np.ndarray
    weights: np.ndarray
    bias: float

    def __post_init__(self):
        for name in ("means", "scales", "weights"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.shape != (36,) or not np.isfinite(arr).all():
                raise ConfigError(f"model {name} must be 36 finite numbers")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if (self.scales <= 0).any():
            raise ConfigError("model scales must be strictly positive")
        if not math.isfinite(self.bias):
            raise ConfigError("model bias must be finite")

    @classmethod
    def from_json(cls, text: str) -> "BrisqueModel":
        try:
            raw = json.loads(text)
            return cls(
                means=raw["means"],
                scales=raw["scales"],
                weights=raw["weights"],
                bias=float(raw["bias"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"malformed model file: {exc}") from exc

    @classmethod
    def load(cls, path) -> "BrisqueModel":
        return cls.from_json(Path(path).read_text())


_default_model_lock = threading.Lock()
_default_model: BrisqueModel | None = None


def load_default_model() -> BrisqueModel:
    """The model bundled with the package (fit offline, see repo docs)."""
    global _default_model
    with _default_model_lock:
        if _default_model is None:
            text = resources.files("evoimage").joinpath("data/brisque_model.json").read_text()
            _default_model = BrisqueModel.from_json(text)
        return _default_model


def brisque_score(image: Image, model: BrisqueModel | None = None) -> QualityScore:
    """Built-in no-reference score; 0 is best, 100 is worst.

    The image is quantized to 8 bits before feature extraction, so the
    score measures the deliverable artifact — identical to rescoring the
    saved PNG, and the same data an external scorer would receive. This
    also stops the search from chasing sub-quantization smoothness that
    would not survive a save.
    """
    if model is None:
        model = load_default_model()
    quantized = Image(quantize_u8(image.data) / 255.0)
    feats = brisque_features(to_luma(quantized))
    z = (feats - model.means) / model.scales
    raw = model.bias + float(z @ model.weights)
    return QualityScore(min(max(raw, 0.0), 100.0), LOWER_BETTER)


# --------------------------------------------------------------------------
# SSIM and noise estimate

_SSIM_RADIUS = 5
_SSIM_KERNEL = gaussian_kernel1d(1.5, _SSIM_RADIUS)
_SSIM_C1 = 0.01**2
_SSIM_C2 = 0.03**2


def _ssim_filter(a: np.ndarray) -> np.ndarray:
    out = ndimage.correlate1d(a, _SSIM_KERNEL, axis=0, mode="reflect")
    out = ndimage.correlate1d(out, _SSIM_KERNEL, axis=1, mode="reflect")
    r = _SSIM_RADIUS
    return out[r:-r, r:-r]


def ssim(a: Image, b: Image) -> float:
    """Mean structural similarity on luma; 11x11 Gaussian window, sigma 1.5.

    Windows are restricted to positions fully inside the image (the
    11-pixel rim contributes no samples). Dynamic range is 1.
    """
    check_same_shape(a, b, "ssim")
    if min(a.width, a.height) < 2 * _SSIM_RADIUS + 1:
        raise DimensionError(f"ssim needs min side >= 11, got {a.height}x{a.width}")
    x = to_luma(a).data[:, :, 0]
    y = to_luma(b).data[:, :, 0]
    mu_x = _ssim_filter(x)
    mu_y = _ssim_filter(y)
    sxx = _ssim_filter(x * x) - mu_x * mu_x
    syy = _ssim_filter(y * y) - mu_y * mu_y
    sxy = _ssim_filter(x * y) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + _SSIM_C1) * (2.0 * sxy + _SSIM_C2)
    den = (mu_x * mu_x + mu_y * mu_y + _SSIM_C1) * (sxx + syy + _SSIM_C2)
    return float(np.mean(num / den))


_NOISE_KERNEL = np.array([[1.0, -2.0, 1.0], [-2.0, 4.0, -2.0], [1.0, -2.0, 1.0]])


def noise_variance(luma: Image) -> float:
    """Immerkaer's fast noise-sigma estimate (intensity units).

    Valid-region convolution with the 3x3 difference-of-Laplacians kernel;
    exactly zero for images affine in the pixel coordinates.
    """
    if luma.channels != 1:
        raise DimensionError("noise_variance expects a 1-channel image")
    check_min_side(luma, 3, "noise_variance")
    y = luma.data[:, :, 0]
    h, w = y.shape
    acc = np.zeros((h - 2, w - 2))
    for dy in range(3):
        for dx in range(3):
            acc += _NOISE_KERNEL[dy, dx] * y[dy : dy + h - 2, dx : dx + w - 2]
    total = np.abs(acc).sum()
    return float(math.sqrt(math.pi / 2.0) * total / (6.0 * (w - 2) * (h - 2)))


# --------------------------------------------------------------------------
# external scorer protocol

_external_gate = threading.BoundedSemaphore(4)


def set_external_concurrency(n: int) -> None:
    """Cap concurrent external-scorer subprocesses (default 4)."""
    global _external_gate
    if n < 1:
        raise ConfigError("concurrency must be >= 1")
    _external_gate = threading.BoundedSemaphore(n)


def external_score(image: Image, config: ScorerConfig) -> QualityScore:
    """Score via a subprocess: PNG path substituted for {image} in the command.

    The command must exit 0 and print exactly one decimal number on stdout.
    """
    config.validate()
    if config.kind != "external":
        raise ConfigError("external_score requires an external ScorerConfig")
    argv = shlex.split(config.command)
    with tempfile.TemporaryDirectory(prefix="evoimage-score-") as tmp:
        png = str(Path(tmp) / "candidate.png")
        save_image(image, png)
        cmd = [t.replace("{image}", png) for t in argv]
        with _external_gate:
            try:
                proc = subprocess.run(
                    cmd, capture_output=True, timeout=config.timeout
                )
            except subprocess.TimeoutExpired as exc:
                raise ScorerTimeout(
                    f"scorer exceeded {config.timeout}s: {config.command!r}"
                ) from exc
            except OSError as exc:
                raise ScorerProcessError(f"cannot launch scorer: {exc}") from exc
    if proc.returncode != 0:
        stderr = proc.stderr.decode(errors="replace").strip()
        raise ScorerProcessError(
            f"scorer exited {proc.returncode}: {stderr or config.command!r}"
        )
    text = proc.stdout.decode(errors="replace").strip()
    try:
        value = float(text)
    except ValueError as exc:
        raise ScorerParseError(f"scorer output is not a number: {text!r}") from exc
    if not math.isfinite(value):
        raise ScorerParseError(f"scorer output is not finite: {text!r}")
    return QualityScore(value, config.orientation)


# --------------------------------------------------------------------------
# scorer front-end used by the search

class Scorer:
    """Callable wrapper binding a ScorerConfig (and eval_downscale) to a metric."""

    def __init__(self, config: ScorerConfig, model: BrisqueModel | None = None):
        config.validate()
        self.config = config
        self._model = model

    @property
    def kind(self) -> str:
        return self.config.kind

    @property
    def orientation(self) -> str:
        if self.config.kind == "brisque_builtin":
            return LOWER_BETTER
        return self.config.orientation

    def score(self, image: Image) -> QualityScore:
        if self.config.eval_downscale is not None:
            image = scale_to_max_side(image, self.config.eval_downscale)
        if self.config.kind == "brisque_builtin":
            return brisque_score(image, self._model)
        return external_score(image, self.config)


def make_scorer(config: ScorerConfig, model: BrisqueModel | None = None) -> Scorer:
    return Scorer(config, model)
