"""Complex steerable pyramid decomposition, built in the frequency domain.

The image spectrum is split by raised-cosine radial masks (one octave wide
in log frequency) and cos^(K-1) angular masks restricted to a single lobe,
giving analytic (complex-valued) oriented band-pass subbands.  After each
scale the retained low-pass spectrum is cropped to the center half, so the
subband grid at scale s is the image grid halved s-1 times (ceil rounding).

The transform is linear and deterministic; orientation bands carry the
usual (-i)^(K-1) phase factor so their real/imaginary parts form even/odd
filter pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np


@dataclass(frozen=True)
class SubbandCoefficients:
    """Complex coefficients of one oriented band-pass subband.

    ``scale`` is 1-based; the coefficient grid of scale s has the image
    dimensions halved s-1 times (ceil).  ``orientation`` indexes the
    angular band, 0 .. n_orientations-1.
    """

    scale: int
    orientation: int
    coefficients: np.ndarray


def subband_shape(image_shape: tuple[int, int], scale: int) -> tuple[int, int]:
    """Grid shape of a subband at 1-based ``scale`` (repeated ceil-halving)."""
    h, w = image_shape
    for _ in range(scale - 1):
        h = int(np.ceil((h - 0.5) / 2))
        w = int(np.ceil((w - 0.5) / 2))
    return h, w


def max_scales(image_shape: tuple[int, int]) -> int:
    """Largest pyramid height whose deepest subband grid is still >= 2x2."""
    n = 1
    while min(subband_shape(image_shape, n + 1)) >= 2:
        n += 1
    return n


def _polar_grids(shape: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    # Frequency grid normalized so the half-band edge sits at radius 1,
    # with DC exactly at the fftshift center bin for even and odd sizes.
    h, w = shape
    ctr_y = int(np.ceil((h + 0.5) / 2)) - 1
    ctr_x = int(np.ceil((w + 0.5) / 2)) - 1
    y = (np.arange(h) - ctr_y) / (h / 2)
    x = (np.arange(w) - ctr_x) / (w / 2)
    xg, yg = np.meshgrid(x, y)
    angle = np.arctan2(yg, xg)
    rad = np.hypot(xg, yg)
    rad[ctr_y, ctr_x] = rad[ctr_y, max(ctr_x - 1, 0)]  # avoid log2(0) at DC
    log_rad = np.log2(rad)
    return log_rad, angle


def _hi_mask(log_rad: np.ndarray, edge: float) -> np.ndarray:
    # Raised-cosine rise from 0 to 1 over log radius [edge-1, edge].
    x = np.clip(log_rad - edge, -1.0, 0.0)
    return np.cos((np.pi / 2.0) * -x)


def _lo_mask(log_rad: np.ndarray, edge: float) -> np.ndarray:
    # Complement of the high-pass: lo^2 + hi^2 = 1 over the transition.
    x = np.clip(log_rad - edge, -1.0, 0.0)
    return np.sin((np.pi / 2.0) * -x)


def _angle_masks(angle: np.ndarray, n_orientations: int) -> list[np.ndarray]:
    # Single-lobe cos^(K-1) angular windows; the factor 2*sqrt(const) keeps
    # the squared masks of all orientations summing to 1 on the annulus.
    order = n_orientations - 1
    const = (
        2.0 ** (2 * order)
        * factorial(order) ** 2
        / (n_orientations * factorial(2 * order))
    )
    masks = []
    for b in range(n_orientations):
        alpha = np.mod(np.pi + angle - np.pi * b / n_orientations, 2 * np.pi) - np.pi
        mask = (
            2.0
            * np.sqrt(const)
            * np.cos(alpha) ** order
            * (np.abs(alpha) < np.pi / 2)
        )
        masks.append(mask)
    return masks


def _crop_bounds(shape: tuple[int, int]) -> tuple[slice, slice, tuple[int, int]]:
    # Center crop keeping ceil((d-0.5)/2) bins per axis, aligned so the DC
    # bin of the cropped grid is again the fftshift center.
    lo_dims = []
    starts = []
    for d in shape:
        ctr = int(np.ceil((d + 0.5) / 2)) - 1
        lod = int(np.ceil((d - 0.5) / 2))
        loctr = int(np.ceil((lod + 0.5) / 2)) - 1
        starts.append(ctr - loctr)
        lo_dims.append(lod)
    return (
        slice(starts[0], starts[0] + lo_dims[0]),
        slice(starts[1], starts[1] + lo_dims[1]),
        (lo_dims[0], lo_dims[1]),
    )


def _check_size(shape: tuple[int, int], n_scales: int) -> None:
    if min(subband_shape(shape, n_scales)) < 2:
        raise ValueError(
            f"image of shape {shape} too small for {n_scales} pyramid scales "
            f"(max {max_scales(shape)})"
        )


def decompose(
    image: np.ndarray,
    n_scales: int,
    n_orientations: int,
    max_scale: int | None = None,
) -> list[SubbandCoefficients]:
    """Decompose ``image`` into oriented complex band-pass subbands.

    Returns subbands ordered by (scale, orientation).  ``max_scale`` stops
    the cascade early (the kept coefficients are identical to a full
    build); size validation always covers all ``n_scales``.
    """
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {img.shape}")
    if n_scales < 1:
        raise ValueError("n_scales must be >= 1")
    if n_orientations < 1:
        raise ValueError("n_orientations must be >= 1")
    _check_size(img.shape, n_scales)
    build_to = n_scales if max_scale is None else min(max_scale, n_scales)

    log_rad, angle = _polar_grids(img.shape)
    phase = (-1j) ** (n_orientations - 1)

    dft = np.fft.fftshift(np.fft.fft2(img))
    lodft = dft * _lo_mask(log_rad, 0.0)

    bands: list[SubbandCoefficients] = []
    for s in range(1, build_to + 1):
        edge = -float(s)
        himask = _hi_mask(log_rad, edge)
        for b, amask in enumerate(_angle_masks(angle, n_orientations)):
            banddft = phase * lodft * himask * amask
            coeffs = np.fft.ifft2(np.fft.ifftshift(banddft))
            bands.append(SubbandCoefficients(scale=s, orientation=b,
                                             coefficients=coeffs))
        if s < build_to:
            ys, xs, _ = _crop_bounds(lodft.shape)
            lodft = lodft[ys, xs]
            log_rad = log_rad[ys, xs]
            angle = angle[ys, xs]
            lodft = lodft * _lo_mask(log_rad, edge)
    return bands
