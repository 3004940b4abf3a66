import numpy as np
import pytest

from evoimage import Image, synthetic_image


@pytest.fixture(scope="session")
def natural_64():
    """Ten fixed procedural scenes, 64x64."""
    return [synthetic_image(seed, (64, 64)) for seed in range(10)]


@pytest.fixture()
def gradient_image():
    """Smooth 32x32 ramp, 3 channels."""
    i = np.linspace(0.1, 0.9, 32)
    arr = np.stack([np.add.outer(i, i) / 2.0] * 3, axis=2)
    return Image(arr)


def pattern_image(h=32, w=32, channels=3):
    """Deterministic textured pattern (no RNG), used for golden hashes."""
    idx = np.arange(h)[:, None, None] * 7 + np.arange(w)[None, :, None] * 13
    idx = idx + np.arange(channels)[None, None, :] * 29
    return Image((idx % 97) / 96.0)


def pattern_image_b(h=32, w=32, channels=3):
    idx = np.arange(h)[:, None, None] * 11 + np.arange(w)[None, :, None] * 5
    idx = idx + np.arange(channels)[None, None, :] * 17
    return Image((idx % 89) / 88.0)
