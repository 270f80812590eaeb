"""Shared fixtures and independent brute-force oracles.

The oracles here deliberately avoid the library's own vectorized code
paths: plain Python loops, flood fill, and pair counting. They are slow
but obviously correct, and the tests compare the fast implementations
against them on small inputs.
"""

from __future__ import annotations

import numpy as np
import pytest

from radprep.raster_io import ForegroundMask, Radiograph


def rad(array, bit_depth=8, source=None) -> Radiograph:
    return Radiograph(
        pixels=np.asarray(array, dtype=np.uint16), bit_depth=bit_depth, source=source
    )


def mask_of(array) -> ForegroundMask:
    return ForegroundMask(bits=np.asarray(array, dtype=bool))


@pytest.fixture
def rng():
    return np.random.default_rng(20240813)


# ---------------------------------------------------------------------------
# oracles


def windowed_std_oracle(pixels: np.ndarray, r: int) -> np.ndarray:
    """Per-pixel std over a clamped (2r+1)^2 window, straight from the definition."""
    h, w = pixels.shape
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            ys = [min(max(y + dy, 0), h - 1) for dy in range(-r, r + 1)]
            xs = [min(max(x + dx, 0), w - 1) for dx in range(-r, r + 1)]
            window = [float(pixels[yy, xx]) for yy in ys for xx in xs]
            mean = sum(window) / len(window)
            out[y, x] = (sum((v - mean) ** 2 for v in window) / len(window)) ** 0.5
    return out


def erode_oracle(bits: np.ndarray, r: int) -> np.ndarray:
    """Square-window erosion; out-of-bounds neighbors never veto."""
    h, w = bits.shape
    out = np.zeros_like(bits)
    for y in range(h):
        for x in range(w):
            keep = True
            for dy in range(-r, r + 1):
                for dx in range(-r, r + 1):
                    yy, xx = y + dy, x + dx
                    if 0 <= yy < h and 0 <= xx < w and not bits[yy, xx]:
                        keep = False
            out[y, x] = keep
    return out


def dilate_oracle(bits: np.ndarray, r: int) -> np.ndarray:
    """Square-window dilation; nothing flows in from outside the frame."""
    h, w = bits.shape
    out = np.zeros_like(bits)
    for y in range(h):
        for x in range(w):
            hit = False
            for dy in range(-r, r + 1):
                for dx in range(-r, r + 1):
                    yy, xx = y + dy, x + dx
                    if 0 <= yy < h and 0 <= xx < w and bits[yy, xx]:
                        hit = True
            out[y, x] = hit
    return out


def components_oracle(bits: np.ndarray) -> list[set[tuple[int, int]]]:
    """8-connected components by flood fill, in row-major discovery order."""
    h, w = bits.shape
    seen = np.zeros_like(bits, dtype=bool)
    components = []
    for y in range(h):
        for x in range(w):
            if not bits[y, x] or seen[y, x]:
                continue
            stack, comp = [(y, x)], set()
            seen[y, x] = True
            while stack:
                cy, cx = stack.pop()
                comp.add((cy, cx))
                for dy in (-1, 0, 1):
                    for dx in (-1, 0, 1):
                        ny, nx = cy + dy, cx + dx
                        if 0 <= ny < h and 0 <= nx < w and bits[ny, nx] and not seen[ny, nx]:
                            seen[ny, nx] = True
                            stack.append((ny, nx))
            components.append(comp)
    return components


def bilinear_oracle(values: np.ndarray, width: int, height: int) -> np.ndarray:
    """Corner-aligned bilinear resize, one pixel at a time."""
    sh, sw = values.shape
    out = np.zeros((height, width))
    for y in range(height):
        sy = (sh - 1) / 2.0 if height == 1 else y * (sh - 1) / (height - 1)
        y0 = min(int(np.floor(sy)), sh - 1)
        y1 = min(y0 + 1, sh - 1)
        fy = sy - y0
        for x in range(width):
            sx = (sw - 1) / 2.0 if width == 1 else x * (sw - 1) / (width - 1)
            x0 = min(int(np.floor(sx)), sw - 1)
            x1 = min(x0 + 1, sw - 1)
            fx = sx - x0
            top = values[y0, x0] * (1 - fx) + values[y0, x1] * fx
            bottom = values[y1, x0] * (1 - fx) + values[y1, x1] * fx
            out[y, x] = top * (1 - fy) + bottom * fy
    return out


def mann_whitney_oracle(samples: list[tuple[float, bool]]) -> float:
    """Fraction of positive-negative pairs ranked correctly, ties half."""
    positives = [s for s, positive in samples if positive]
    negatives = [s for s, positive in samples if not positive]
    total = 0.0
    for p in positives:
        for n in negatives:
            if p > n:
                total += 1.0
            elif p == n:
                total += 0.5
    return total / (len(positives) * len(negatives))


def block_fixture(rng, size=96, block=None) -> Radiograph:
    """Flat zero background with one noisy bright block: a toy radiograph.

    The noise amplitude is large so the block interior's local deviation
    clearly exceeds that of background pixels whose window only grazes the
    block edge.
    """
    if block is None:
        block = (28, 28, 40, 40)  # y, x, h, w
    pixels = np.zeros((size, size), dtype=np.uint16)
    y, x, bh, bw = block
    pixels[y : y + bh, x : x + bw] = 2000 + rng.integers(0, 2000, size=(bh, bw))
    return Radiograph(pixels=pixels, bit_depth=12)
