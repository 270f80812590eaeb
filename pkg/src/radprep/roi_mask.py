"""From attention map to a clean single-organ foreground mask.

Pipeline: upsample the attention map to image resolution, keep the pixels
above the 70th-percentile attention value, clean specks and pinholes with
a morphological open/close pair, and keep the largest 8-connected
component.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .attention import AttentionProvider
from .errors import EmptyMask
from .raster_io import AttentionMap, ForegroundMask, Radiograph, write_image

CONNECTIVITY = 8  # fixed: diagonal neighbors join a component
_LABEL_STRUCTURE = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class MaskParams:
    """Knobs for mask extraction.

    ``morph_radius=None`` selects the per-image default
    ``max(1, round(0.005 * min(width, height)))``: large enough to remove
    specks, small enough not to eat a limb.
    """

    percentile: float = 70.0
    morph_radius: int | None = None

    def __post_init__(self):
        if not 0.0 < self.percentile < 100.0:
            raise ValueError(f"percentile must be in (0, 100), got {self.percentile}")
        if self.morph_radius is not None and self.morph_radius < 0:
            raise ValueError("morph_radius must be >= 0")

    def radius_for(self, width: int, height: int) -> int:
        if self.morph_radius is not None:
            return self.morph_radius
        return max(1, int(math.floor(0.005 * min(width, height) + 0.5)))


def percentile_threshold(amap: AttentionMap, p: float) -> ForegroundMask:
    """Keep values strictly above the nearest-rank p-th percentile.

    The threshold is the k-th smallest value with k = ceil(p/100 * n), so
    the mask depends only on value ranks. Strict inequality means a
    constant map raises EmptyMask instead of selecting everything.
    """
    if not 0.0 < p < 100.0:
        raise ValueError(f"percentile must be in (0, 100), got {p}")
    flat = amap.values.ravel()
    k = math.ceil(p * flat.size / 100.0)
    threshold = np.partition(flat, k - 1)[k - 1]
    bits = amap.values > threshold
    if not bits.any():
        raise EmptyMask(f"no attention value exceeds the {p}th percentile")
    return ForegroundMask(bits=bits)


def _structure(radius: int) -> np.ndarray:
    return np.ones((2 * radius + 1, 2 * radius + 1), dtype=bool)


def morph_open(mask: ForegroundMask, radius: int) -> ForegroundMask:
    """Erosion then dilation with a square element; radius 0 is identity.

    Out-of-bounds counts as foreground for erosion and background for
    dilation, which keeps open/close an adjunction pair: anti-extensive,
    extensive, and idempotent even at image borders.
    """
    if radius == 0:
        return ForegroundMask(bits=mask.bits.copy())
    eroded = ndimage.binary_erosion(mask.bits, _structure(radius), border_value=1)
    opened = ndimage.binary_dilation(eroded, _structure(radius), border_value=0)
    return ForegroundMask(bits=opened)


def morph_close(mask: ForegroundMask, radius: int) -> ForegroundMask:
    """Dilation then erosion; same border convention as morph_open."""
    if radius == 0:
        return ForegroundMask(bits=mask.bits.copy())
    dilated = ndimage.binary_dilation(mask.bits, _structure(radius), border_value=0)
    closed = ndimage.binary_erosion(dilated, _structure(radius), border_value=1)
    return ForegroundMask(bits=closed)


def largest_component(mask: ForegroundMask) -> ForegroundMask:
    """Keep only the biggest 8-connected component.

    Area ties go to the component whose first pixel comes earliest in
    row-major order (scipy labels in scan order, so the smallest label).
    """
    if not mask.bits.any():
        raise EmptyMask("mask has no foreground pixel")
    labels, count = ndimage.label(mask.bits, structure=_LABEL_STRUCTURE)
    if count == 1:
        return ForegroundMask(bits=mask.bits.copy())
    areas = np.bincount(labels.ravel())[1:]
    winner = int(np.argmax(areas)) + 1  # argmax returns the first maximum
    return ForegroundMask(bits=labels == winner)


def resize_bilinear(amap: AttentionMap, width: int, height: int) -> AttentionMap:
    """Corner-aligned bilinear resampling.

    Source coordinate of output index i is i * (src-1)/(dst-1); a
    length-1 axis samples its center. Corners are reproduced exactly.
    """
    if width < 1 or height < 1:
        raise ValueError("target dimensions must be >= 1")
    src = amap.values.astype(np.float64)
    y0, y1, wy = _axis_coords(amap.height, height)
    x0, x1, wx = _axis_coords(amap.width, width)
    top = src[y0][:, x0] * (1 - wx) + src[y0][:, x1] * wx
    bottom = src[y1][:, x0] * (1 - wx) + src[y1][:, x1] * wx
    out = top * (1 - wy)[:, None] + bottom * wy[:, None]
    return AttentionMap(values=out.astype(np.float32))


def _axis_coords(src_len: int, dst_len: int):
    if dst_len == 1:
        coords = np.array([(src_len - 1) / 2.0])
    elif src_len == 1:
        coords = np.zeros(dst_len)
    else:
        coords = np.arange(dst_len) * ((src_len - 1) / (dst_len - 1))
    lo = np.clip(np.floor(coords).astype(np.int64), 0, src_len - 1)
    hi = np.clip(lo + 1, 0, src_len - 1)
    return lo, hi, coords - lo


def extract_roi(
    image: Radiograph,
    provider: AttentionProvider,
    params: MaskParams = MaskParams(),
) -> ForegroundMask:
    """Full mask pipeline; output has exactly one 8-connected component."""
    amap = provider.attention_for(image)
    if (amap.height, amap.width) != (image.height, image.width):
        amap = resize_bilinear(amap, image.width, image.height)
    mask = percentile_threshold(amap, params.percentile)
    radius = params.radius_for(image.width, image.height)
    mask = morph_open(mask, radius)
    mask = morph_close(mask, radius)
    if not mask.bits.any():
        raise EmptyMask("morphology removed every foreground pixel")
    return largest_component(mask)


def write_mask(mask: ForegroundMask, path) -> None:
    """Store a mask as an 8-bit raster with values {0, 255}."""
    raster = Radiograph(pixels=mask.bits.astype(np.uint16) * 255, bit_depth=8)
    write_image(raster, path)
