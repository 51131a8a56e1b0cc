import numpy as np
import pytest
from scipy.ndimage import gaussian_filter


def band_limited_texture(seed: int, shape: tuple[int, int],
                         smooth: float = 2.0) -> np.ndarray:
    """Low-pass filtered uniform noise rescaled into [20, 235]."""
    rng = np.random.default_rng(seed)
    raw = gaussian_filter(rng.uniform(0, 255, shape), smooth, mode="wrap")
    return 20.0 + (raw - raw.min()) * (215.0 / (raw.max() - raw.min()))


def random_image(seed: int, shape: tuple[int, int]) -> np.ndarray:
    return np.random.default_rng(seed).uniform(0.0, 255.0, shape)


@pytest.fixture
def texture():
    return band_limited_texture


@pytest.fixture
def rand_img():
    return random_image
