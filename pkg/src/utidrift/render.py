"""Deterministic raster output: matrix heatmaps and wedge scan conversion.

Pixel buffers are assembled directly in numpy and written as 8-bit RGB PNG
through Pillow with no ancillary chunks, so identical inputs always produce
byte-identical files -- the regression tests rely on this.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .analysis import SimilarityMatrix

# Anchor rows of the familiar dark-blue -> green -> yellow palette, sampled
# every 8th entry of the reference 256-color table; lookup interpolates.
_VIRIDIS_ANCHORS = np.array([
    (68, 1, 84), (70, 12, 95), (71, 24, 106), (72, 34, 115), (71, 45, 122),
    (69, 55, 129), (66, 64, 134), (62, 73, 137), (58, 82, 139), (54, 91, 141),
    (49, 99, 142), (46, 107, 142), (42, 115, 142), (39, 122, 142),
    (36, 130, 141), (33, 137, 140), (30, 145, 138), (29, 152, 136),
    (31, 159, 132), (37, 167, 127), (47, 174, 121), (60, 181, 112),
    (75, 188, 102), (93, 194, 91), (112, 200, 78), (132, 205, 63),
    (153, 209, 48), (174, 213, 32), (195, 216, 22), (216, 218, 25),
    (236, 220, 38), (253, 231, 37),
], dtype=np.float64)

_PALETTES = {}


def _build_lut(name: str) -> np.ndarray:
    if name == "viridis":
        xs = np.linspace(0.0, 1.0, len(_VIRIDIS_ANCHORS))
        t = np.linspace(0.0, 1.0, 256)
        lut = np.stack(
            [np.interp(t, xs, _VIRIDIS_ANCHORS[:, c]) for c in range(3)], axis=1
        )
        return np.clip(np.rint(lut), 0, 255).astype(np.uint8)
    if name == "gray":
        t = np.arange(256, dtype=np.uint8)
        return np.stack([t, t, t], axis=1)
    raise ValueError(f"unknown colormap {name!r} (expected 'viridis' or 'gray')")


def palette_lut(name: str) -> np.ndarray:
    """256x3 uint8 lookup table for a named palette."""
    if name not in _PALETTES:
        _PALETTES[name] = _build_lut(name)
    return _PALETTES[name]


@dataclass(frozen=True)
class HeatmapSpec:
    """Rendering parameters for a similarity-matrix heatmap."""

    colormap: str = "viridis"
    value_range: tuple[float, float] | None = None
    nan_color: tuple[int, int, int] = (255, 255, 255)
    cell_size: int = 4
    tick_every: int = 10
    margin: int = 8

    def validate(self) -> None:
        if self.value_range is not None and not self.value_range[0] < self.value_range[1]:
            raise ValueError("value_range min must be < max")
        if self.cell_size < 1:
            raise ValueError("cell_size must be >= 1")
        palette_lut(self.colormap)


@dataclass(frozen=True)
class WedgeSpec:
    """Geometry for displaying scanline data in fan (wedge) orientation."""

    angle_span: float = np.deg2rad(92.0)
    zero_offset: float = 10.0
    output_size: int = 512
    interpolation: str = "bilinear"

    def validate(self) -> None:
        if not 0.0 < self.angle_span <= np.pi:
            raise ValueError("angle_span must be in (0, pi]")
        if self.zero_offset < 0:
            raise ValueError("zero_offset must be >= 0")
        if self.output_size < 8:
            raise ValueError("output_size must be >= 8")
        if self.interpolation not in ("nearest", "bilinear"):
            raise ValueError("interpolation must be 'nearest' or 'bilinear'")


def save_png(rgb: np.ndarray, out: str | os.PathLike) -> Path:
    """Write an (H, W, 3) uint8 buffer as a plain RGB PNG."""
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(rgb, mode="RGB").save(path, format="PNG")
    return path


# --------------------------------------------------------------------------
# heatmaps
# --------------------------------------------------------------------------

def heatmap_pixels(m: SimilarityMatrix, spec: HeatmapSpec = HeatmapSpec()) -> np.ndarray:
    """RGB pixel buffer for a matrix heatmap (pure function of inputs).

    The matrix occupies an n*cell_size square with the NaN diagonal drawn
    in ``nan_color``; a white margin on the left and bottom carries tick
    marks every ``tick_every`` utterances.
    """
    spec.validate()
    v = m.values
    finite = v[np.isfinite(v)]
    if spec.value_range is not None:
        lo, hi = spec.value_range
    elif finite.size and finite.min() < finite.max():
        lo, hi = float(finite.min()), float(finite.max())
    else:
        lo, hi = 0.0, 0.0

    lut = palette_lut(spec.colormap)
    if hi > lo:
        norm = np.clip((v - lo) / (hi - lo), 0.0, 1.0)
    else:
        norm = np.full_like(v, 0.5)  # degenerate range: mid palette
    idx = np.clip(np.rint(norm * 255), 0, 255)
    nan_mask = ~np.isfinite(v)
    idx[nan_mask] = 0
    cells = lut[idx.astype(np.intp)]
    cells[nan_mask] = np.array(spec.nan_color, dtype=np.uint8)

    cs = spec.cell_size
    grid = np.repeat(np.repeat(cells, cs, axis=0), cs, axis=1)

    mg = spec.margin
    n = m.n
    h, w = grid.shape[:2]
    out = np.full((h + mg, w + mg, 3), 255, dtype=np.uint8)
    out[:h, mg:] = grid
    tick_len = max(2, mg - 2)
    for i in range(0, n, spec.tick_every):
        pos = i * cs
        out[pos:pos + 1, mg - tick_len:mg] = 0          # left tick
        out[h:h + tick_len, mg + pos:mg + pos + 1] = 0  # bottom tick
    return out


def render_heatmap(
    m: SimilarityMatrix, spec: HeatmapSpec, out: str | os.PathLike
) -> Path:
    """Render the heatmap to a PNG file and return its path."""
    return save_png(heatmap_pixels(m, spec), out)


# --------------------------------------------------------------------------
# wedge scan conversion
# --------------------------------------------------------------------------

def wedge_pixels(img: np.ndarray, spec: WedgeSpec = WedgeSpec()) -> np.ndarray:
    """Scan-convert a scanline image into fan orientation (grayscale array).

    Rows are treated as beam angles spread evenly across ``angle_span``
    (row 0 at -span/2), columns as radial samples starting ``zero_offset``
    samples from the virtual apex.  The fan opens upward from an apex at
    the bottom center; output pixels are inverse-mapped into the scanline
    grid, and pixels outside the fan are 0.
    """
    spec.validate()
    src = np.asarray(img, dtype=np.float64)
    if src.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {src.shape}")
    n_beams, n_samples = src.shape

    size = spec.output_size
    apex_x = (size - 1) / 2.0
    apex_y = float(size - 1)
    # Largest radius (in pixels) at which the whole fan still fits the
    # square canvas: limited vertically at zero angle, horizontally at the
    # fan edges.
    r_max_pix = min(apex_y, apex_x / max(np.sin(spec.angle_span / 2.0), 1e-9))
    scale = (spec.zero_offset + n_samples) / r_max_pix  # samples per pixel

    ys, xs = np.mgrid[0:size, 0:size]
    dx = xs - apex_x
    dy = apex_y - ys
    radius = np.hypot(dx, dy) * scale
    theta = np.arctan2(dx, dy)  # 0 = straight up, positive to the right

    if n_beams > 1:
        row = (theta + spec.angle_span / 2.0) * (n_beams - 1) / spec.angle_span
    else:
        row = np.where(np.abs(theta) <= spec.angle_span / 2.0, 0.0, -1.0)
    col = radius - spec.zero_offset
    valid = (row >= 0) & (row <= n_beams - 1) & (col >= 0) & (col <= n_samples - 1)

    out = np.zeros((size, size), dtype=np.float64)
    if spec.interpolation == "nearest":
        r = np.clip(np.rint(row), 0, n_beams - 1).astype(np.intp)
        c = np.clip(np.rint(col), 0, n_samples - 1).astype(np.intp)
        out[valid] = src[r[valid], c[valid]]
    else:
        r0 = np.clip(np.floor(row), 0, n_beams - 1).astype(np.intp)
        c0 = np.clip(np.floor(col), 0, n_samples - 1).astype(np.intp)
        r1 = np.minimum(r0 + 1, n_beams - 1)
        c1 = np.minimum(c0 + 1, n_samples - 1)
        fr = np.clip(row - r0, 0.0, 1.0)
        fc = np.clip(col - c0, 0.0, 1.0)
        top = src[r0, c0] * (1 - fc) + src[r0, c1] * fc
        bot = src[r1, c0] * (1 - fc) + src[r1, c1] * fc
        blend = top * (1 - fr) + bot * fr
        out[valid] = blend[valid]
    return out


def render_wedge(
    img: np.ndarray, spec: WedgeSpec, out: str | os.PathLike
) -> Path:
    """Render a mean image in wedge orientation to an 8-bit RGB PNG."""
    wedge = wedge_pixels(img, spec)
    gray = np.clip(np.rint(wedge), 0, 255).astype(np.uint8)
    return save_png(np.stack([gray, gray, gray], axis=-1), out)
