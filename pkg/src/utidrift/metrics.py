"""Pairwise image comparison measures for mean ultrasound images.

Three measures are provided, all computed on the [0, 255] grayscale scale:

* ``mse`` -- mean squared pixel difference (error measure, lower = closer),
* ``ssim`` -- structural similarity with a circular-symmetric Gaussian
  window (11x11, sigma 1.5 by default), luminance/contrast/structure
  exponents configurable,
* ``cw_ssim`` -- the complex-wavelet variant of SSIM, evaluated on local
  windows of steerable-pyramid coefficients, tolerant to small geometric
  shifts.

All three are symmetric not just mathematically but in floating point:
swapping the operands returns the bit-identical result.  Inputs are
validated to be finite real images in [0, 255] with matching shapes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.ndimage import correlate1d

from . import pyramid


@dataclass(frozen=True)
class SsimParams:
    """Windowed SSIM parameters (defaults follow the original metric)."""

    window_size: int = 11
    gaussian_sigma: float = 1.5
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 255.0

    def validate(self, image_shape: tuple[int, int] | None = None) -> None:
        if self.window_size < 3 or self.window_size % 2 == 0:
            raise ValueError("window_size must be odd and >= 3")
        if self.gaussian_sigma <= 0:
            raise ValueError("gaussian_sigma must be > 0")
        if self.k1 <= 0 or self.k2 <= 0:
            raise ValueError("k1 and k2 must be > 0")
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ValueError("exponents must be >= 0")
        if self.dynamic_range <= 0:
            raise ValueError("dynamic_range must be > 0")
        if image_shape is not None and self.window_size > min(image_shape):
            raise ValueError(
                f"window_size {self.window_size} exceeds image "
                f"min dimension {min(image_shape)}"
            )


@dataclass(frozen=True)
class CwSsimParams:
    """Complex-wavelet SSIM parameters.

    Subbands of the steerable pyramid at ``comparison_level`` are compared
    over sliding ``local_window`` x ``local_window`` coefficient windows.
    """

    k_stabilizer: float = 0.01
    n_scales: int = 4
    n_orientations: int = 6
    comparison_level: int = 2
    local_window: int = 7

    def validate(self, image_shape: tuple[int, int] | None = None) -> None:
        if self.k_stabilizer <= 0:
            raise ValueError("k_stabilizer must be > 0")
        if self.n_scales < 1:
            raise ValueError("n_scales must be >= 1")
        if not 1 <= self.comparison_level <= self.n_scales:
            raise ValueError("comparison_level must be within [1, n_scales]")
        if self.local_window < 1 or self.local_window % 2 == 0:
            raise ValueError("local_window must be odd and >= 1")
        if self.n_orientations < 1:
            raise ValueError("n_orientations must be >= 1")
        if image_shape is not None:
            level_shape = pyramid.subband_shape(image_shape, self.comparison_level)
            if min(level_shape) < self.local_window:
                raise ValueError(
                    f"image {image_shape} leaves a {level_shape} grid at "
                    f"comparison level {self.comparison_level}, smaller than "
                    f"the {self.local_window}x{self.local_window} window"
                )


def as_mean_image(a: np.ndarray) -> np.ndarray:
    """Validate and return ``a`` as a float64 mean image in [0, 255]."""
    img = np.ascontiguousarray(a, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"expected a 2-D image, got shape {img.shape}")
    if not np.isfinite(img).all():
        raise ValueError("image contains non-finite pixels")
    if img.min() < 0.0 or img.max() > 255.0:
        raise ValueError("pixel values must lie within [0, 255]")
    return img


def _check_pair(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = as_mean_image(a)
    y = as_mean_image(b)
    if x.shape != y.shape:
        raise ValueError(f"image dimensions differ: {x.shape} vs {y.shape}")
    return x, y


# --------------------------------------------------------------------------
# MSE
# --------------------------------------------------------------------------

def mse(a: np.ndarray, b: np.ndarray) -> float:
    """Mean squared difference of two images on the [0, 255] pixel scale."""
    x, y = _check_pair(a, b)
    d = x - y
    return float(np.mean(d * d))


# --------------------------------------------------------------------------
# SSIM
# --------------------------------------------------------------------------

def gaussian_window(size: int, sigma: float) -> np.ndarray:
    """Circular-symmetric 2-D Gaussian window, normalized to unit sum."""
    half = (size - 1) / 2.0
    g = np.exp(-((np.arange(size) - half) ** 2) / (2.0 * sigma * sigma))
    g /= g.sum()
    return np.outer(g, g)


def _local_mean(img: np.ndarray, kernel1d: np.ndarray) -> np.ndarray:
    # Separable valid-region Gaussian weighting; windows fully inside only.
    half = len(kernel1d) // 2
    out = correlate1d(img, kernel1d, axis=0, mode="constant")
    out = correlate1d(out, kernel1d, axis=1, mode="constant")
    return out[half:img.shape[0] - half, half:img.shape[1] - half]


def _signed_power(base: np.ndarray, exponent: float) -> np.ndarray:
    if exponent == 1.0:
        return base
    return np.sign(base) * np.abs(base) ** exponent


def ssim(a: np.ndarray, b: np.ndarray, p: SsimParams = SsimParams()) -> float:
    """Mean structural similarity over all fully interior window positions.

    Local means, variances and covariance are Gaussian-weighted; with the
    default exponents the luminance*contrast*structure product reduces to
    the familiar two-factor form.  Identity pairs score exactly 1.
    """
    x, y = _check_pair(a, b)
    p.validate(x.shape)

    half = (p.window_size - 1) / 2.0
    g = np.exp(-((np.arange(p.window_size) - half) ** 2)
               / (2.0 * p.gaussian_sigma ** 2))
    g /= g.sum()

    mu_x = _local_mean(x, g)
    mu_y = _local_mean(y, g)
    # Biased (weighted) second moments; tiny negative values from rounding
    # are clamped before the square roots.
    var_x = np.maximum(_local_mean(x * x, g) - mu_x * mu_x, 0.0)
    var_y = np.maximum(_local_mean(y * y, g) - mu_y * mu_y, 0.0)
    cov_xy = _local_mean(x * y, g) - mu_x * mu_y

    c1 = (p.k1 * p.dynamic_range) ** 2
    c2 = (p.k2 * p.dynamic_range) ** 2
    c3 = c2 / 2.0

    sig_x = np.sqrt(var_x)
    sig_y = np.sqrt(var_y)
    lum = (2.0 * mu_x * mu_y + c1) / (mu_x * mu_x + mu_y * mu_y + c1)
    con = (2.0 * sig_x * sig_y + c2) / (var_x + var_y + c2)
    struct = (cov_xy + c3) / (sig_x * sig_y + c3)

    local = (
        _signed_power(lum, p.alpha)
        * _signed_power(con, p.beta)
        * _signed_power(struct, p.gamma)
    )
    return float(np.mean(local))


# --------------------------------------------------------------------------
# CW-SSIM
# --------------------------------------------------------------------------

def complex_wavelet_decompose(
    a: np.ndarray, p: CwSsimParams = CwSsimParams()
) -> list[pyramid.SubbandCoefficients]:
    """Full steerable-pyramid decomposition of a mean image."""
    img = as_mean_image(a)
    p.validate(img.shape)
    return pyramid.decompose(img, p.n_scales, p.n_orientations)


def comparison_subbands(a: np.ndarray, p: CwSsimParams) -> list[np.ndarray]:
    """Coefficient grids of all orientations at the comparison level.

    Building stops at the comparison level; the returned grids are
    identical to the corresponding subbands of a full decomposition.
    """
    img = as_mean_image(a)
    p.validate(img.shape)
    bands = pyramid.decompose(img, p.n_scales, p.n_orientations,
                              max_scale=p.comparison_level)
    return [b.coefficients for b in bands if b.scale == p.comparison_level]


def _window_sums(grid: np.ndarray, size: int) -> np.ndarray:
    # Two-stage separable sliding sum; every output is a direct sum of
    # size*size neighbors (no running-sum cancellation), which keeps the
    # error local and the result independent of global magnitudes.
    cols = sliding_window_view(grid, size, axis=0).sum(axis=-1)
    return sliding_window_view(cols, size, axis=1).sum(axis=-1)


def prepare_subbands(bands: list[np.ndarray], p: CwSsimParams):
    """Pair each subband with its cached window sums of squared magnitudes.

    The cached sums are exactly what the denominator of each local score
    needs; reusing them makes all-pairs evaluation cheap.
    """
    return [
        (w, _window_sums(w.real * w.real + w.imag * w.imag, p.local_window))
        for w in bands
    ]


def _cw_ssim_prepared(prepared_a, prepared_b, p: CwSsimParams) -> float:
    total = 0.0
    count = 0
    k = p.k_stabilizer
    for (wa, da), (wb, db) in zip(prepared_a, prepared_b):
        cross = wa * np.conj(wb)
        num = 2.0 * np.abs(_window_sums(cross, p.local_window)) + k
        den = da + db + k
        local = num / den
        total += float(local.sum())
        count += local.size
    return total / count


def cw_ssim_from_subbands(
    bands_a: list[np.ndarray], bands_b: list[np.ndarray], p: CwSsimParams
) -> float:
    """CW-SSIM from precomputed comparison-level subbands (see ``cw_ssim``)."""
    return _cw_ssim_prepared(prepare_subbands(bands_a, p),
                             prepare_subbands(bands_b, p), p)


def cw_ssim(a: np.ndarray, b: np.ndarray, p: CwSsimParams = CwSsimParams()) -> float:
    """Complex-wavelet structural similarity in [0, 1].

    For every orientation subband at the comparison level, a local window
    slides over the coefficient grids; each window scores
    ``(2|sum w_a conj(w_b)| + K) / (sum |w_a|^2 + sum |w_b|^2 + K)`` over
    its coefficients, and the scores are averaged across windows and
    orientations.  Identical images score exactly 1; small translations
    mostly shift coefficient phases and are penalized far less than by
    plain SSIM.
    """
    x, y = _check_pair(a, b)
    p.validate(x.shape)
    bands_a = comparison_subbands(x, p)
    bands_b = comparison_subbands(y, p)
    return cw_ssim_from_subbands(bands_a, bands_b, p)
