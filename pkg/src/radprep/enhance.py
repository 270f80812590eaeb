"""Contrast enhancement: foreground-masked histogram equalization plus the
global-HE, CLAHE, and naive-8-bit baselines.

Masked equalization builds the cumulative histogram from region-of-interest
pixels only, stretches them over the full 16-bit range, and zeroes the
background outright. Because the mapping depends only on the ranks of the
occupied intensity levels, the output is invariant under any strictly
increasing transform of the foreground intensities: the property that makes
the method indifferent to how a scanner allocated its dynamic range.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .attention import AttentionProvider
from .errors import DimensionMismatch, EmptyMask, TileTooSmall
from .raster_io import ForegroundMask, Radiograph, write_image
from .roi_mask import MaskParams, extract_roi, write_mask

OUTPUT_MAX = 65535  # enhanced images always use the full 16-bit range


@dataclass(frozen=True)
class ClaheParams:
    """Tile grid and clip level for CLAHE.

    The per-tile clip limit is ``clip_factor * tile_pixels / 256`` (at
    least 1); a factor >= 256 disables clipping entirely.
    """

    tiles: tuple[int, int] = (8, 8)
    clip_factor: float = 2.0

    def __post_init__(self):
        rows, cols = self.tiles
        if rows < 1 or cols < 1:
            raise ValueError("tile grid must be at least 1x1")
        if self.clip_factor <= 0:
            raise ValueError("clip_factor must be positive")


def _equalize_lut(counts: np.ndarray, out_max: int) -> np.ndarray:
    """Cumulative-histogram LUT: round((C - c_min)/(N - c_min) * out_max).

    ``c_min`` is the cumulative count at the lowest occupied level, so that
    level lands on 0 and the highest occupied level on ``out_max``.
    """
    cumulative = np.cumsum(counts, dtype=np.int64)
    total = int(cumulative[-1])
    occupied = np.flatnonzero(counts)
    c_min = int(cumulative[occupied[0]])
    scaled = (cumulative - c_min).astype(np.float64) * out_max / (total - c_min)
    return np.clip(np.floor(scaled + 0.5), 0, out_max).astype(np.int64)


def _stretch_factor(bit_depth: int, out_max: int) -> int:
    return int(np.floor(out_max / ((1 << bit_depth) - 1) + 0.5))


def masked_hist_equalize(image: Radiograph, mask: ForegroundMask) -> Radiograph:
    """Equalize foreground intensities to 16 bits; zero the background.

    The histogram, cumulative sum, and normalization all come from masked
    pixels only, so no background pixel can influence any output value.
    A degenerate foreground (fewer than two occupied levels) falls back to
    a plain bit-depth stretch instead of dividing by zero.
    """
    if mask.bits.shape != image.pixels.shape:
        raise DimensionMismatch(
            f"mask {mask.bits.shape} vs image {image.pixels.shape}"
        )
    if not mask.bits.any():
        raise EmptyMask("cannot equalize over an empty foreground")
    fg = image.pixels[mask.bits]
    counts = np.bincount(fg, minlength=1 << image.bit_depth)
    if np.count_nonzero(counts) < 2:
        lut = np.arange(1 << image.bit_depth, dtype=np.int64) * _stretch_factor(
            image.bit_depth, OUTPUT_MAX
        )
    else:
        lut = _equalize_lut(counts, OUTPUT_MAX)
    out = np.where(mask.bits, lut[image.pixels], 0).astype(np.uint16)
    return Radiograph(pixels=out, bit_depth=16, source=image.source)


def global_hist_equalize(image: Radiograph) -> Radiograph:
    """Whole-image 16-bit histogram equalization (the HE baseline)."""
    full = ForegroundMask(bits=np.ones(image.pixels.shape, dtype=bool))
    return masked_hist_equalize(image, full)


# ---------------------------------------------------------------------------
# CLAHE baseline (8-bit)


def clip_histogram(counts: np.ndarray, clip_limit: int) -> tuple[np.ndarray, int]:
    """Cap every bin at ``clip_limit``; return the clipped bins and excess."""
    clipped = np.minimum(counts, clip_limit)
    excess = int(counts.sum() - clipped.sum())
    return clipped, excess


def redistribute_excess(counts: np.ndarray, excess: int) -> np.ndarray:
    """Spread ``excess`` uniformly over all bins in a single pass.

    The remainder that does not divide evenly goes one count per bin
    starting at bin 0, which keeps the result reproducible.
    """
    out = counts.copy()
    nbins = len(out)
    out += excess // nbins
    residual = excess % nbins
    out[:residual] += 1
    return out


def _tile_edges(length: int, parts: int) -> list[tuple[int, int]]:
    step = length // parts
    edges = [(i * step, (i + 1) * step) for i in range(parts)]
    start, _ = edges[-1]
    edges[-1] = (start, length)  # last tile absorbs the remainder
    return edges


def clahe(image: Radiograph, params: ClaheParams = ClaheParams()) -> Radiograph:
    """Contrast-limited adaptive histogram equalization on an 8-bit image.

    Per tile: clip the histogram, redistribute the excess, and build the
    equalization LUT; each output pixel bilinearly blends the LUTs of the
    four nearest tile centers (replicated past the border tiles). Constant
    tiles keep the identity mapping, so a constant image is unchanged.
    """
    if image.bit_depth != 8:
        raise ValueError("CLAHE operates on 8-bit images; convert first")
    rows, cols = params.tiles
    if image.height < rows or image.width < cols:
        raise TileTooSmall(
            f"{rows}x{cols} tiles do not fit a {image.height}x{image.width} image"
        )
    row_edges = _tile_edges(image.height, rows)
    col_edges = _tile_edges(image.width, cols)

    luts = np.empty((rows, cols, 256), dtype=np.int64)
    centers_y = np.array([(y0 + y1 - 1) / 2.0 for y0, y1 in row_edges])
    centers_x = np.array([(x0 + x1 - 1) / 2.0 for x0, x1 in col_edges])
    for i, (y0, y1) in enumerate(row_edges):
        for j, (x0, x1) in enumerate(col_edges):
            tile = image.pixels[y0:y1, x0:x1]
            counts = np.bincount(tile.ravel(), minlength=256)
            if np.count_nonzero(counts) < 2:
                luts[i, j] = np.arange(256)
                continue
            clip_limit = max(1, int(params.clip_factor * tile.size / 256))
            clipped, excess = clip_histogram(counts, clip_limit)
            luts[i, j] = _equalize_lut(redistribute_excess(clipped, excess), 255)

    i0, i1, wy = _blend_weights(np.arange(image.height), centers_y)
    j0, j1, wx = _blend_weights(np.arange(image.width), centers_x)
    img = image.pixels
    top = (
        luts[i0[:, None], j0[None, :], img] * (1 - wx)[None, :]
        + luts[i0[:, None], j1[None, :], img] * wx[None, :]
    )
    bottom = (
        luts[i1[:, None], j0[None, :], img] * (1 - wx)[None, :]
        + luts[i1[:, None], j1[None, :], img] * wx[None, :]
    )
    blended = top * (1 - wy)[:, None] + bottom * wy[:, None]
    out = np.clip(np.floor(blended + 0.5), 0, 255).astype(np.uint16)
    return Radiograph(pixels=out, bit_depth=8, source=image.source)


def _blend_weights(coords: np.ndarray, centers: np.ndarray):
    """Bracketing tile indices and blend fraction for each coordinate."""
    hi = np.searchsorted(centers, coords)
    lo = np.clip(hi - 1, 0, len(centers) - 1)
    hi = np.clip(hi, 0, len(centers) - 1)
    span = centers[hi] - centers[lo]
    frac = np.where(span > 0, (coords - centers[lo]) / np.where(span > 0, span, 1.0), 0.0)
    return lo, hi, np.clip(frac, 0.0, 1.0)


# ---------------------------------------------------------------------------
# end-to-end enhancement


def enhance_pipeline(
    image: Radiograph,
    provider: AttentionProvider,
    mask_params: MaskParams = MaskParams(),
    out_dir=None,
) -> tuple[Radiograph, ForegroundMask]:
    """Extract the ROI mask, equalize the foreground, optionally write both.

    With ``out_dir`` set, writes ``<stem>.enhanced.png`` (16-bit) and
    ``<stem>.mask.png`` next to each other and returns the in-memory pair.
    """
    mask = extract_roi(image, provider, mask_params)
    enhanced = masked_hist_equalize(image, mask)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        stem = image.source.stem if image.source is not None else "image"
        write_image(enhanced, out_dir / f"{stem}.enhanced.png")
        write_mask(mask, out_dir / f"{stem}.mask.png")
    return enhanced, mask
