"""Grayscale raster types, container I/O (PNG/PGM), and the ATTN map format.

All rasters are stored row-major. Pixel payloads round-trip bit-exactly
through both containers. Intensities are unsigned and bounded by the
declared bit depth: every value < 2**bit_depth.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    BadMagic,
    ColorImageRejected,
    CorruptFile,
    DimensionMismatch,
    IoFailure,
    NonFiniteValue,
    TruncatedFile,
    UnsupportedFormat,
)

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
_ATTN_MAGIC = b"ATTN"
_ATTN_VERSION = 1

# Pillow modes that mean "not single-channel grayscale"
_COLOR_MODES = {"RGB", "RGBA", "P", "PA", "LA", "La", "CMYK", "YCbCr", "HSV", "LAB", "RGBX"}


def round_half_up(x):
    """Round half away from zero (inputs here are never negative halves)."""
    return np.where(x >= 0, np.floor(x + 0.5), np.ceil(x - 0.5))


@dataclass(eq=False)
class Radiograph:
    """Single-channel raster with an explicit bit depth in [8, 16].

    ``pixels`` is a 2-D uint16 array (height x width); ``source`` remembers
    where the raster was loaded from so sidecar files can be located. It is
    carried along by pure transforms and ignored for equality purposes.
    """

    pixels: np.ndarray
    bit_depth: int
    source: Path | None = field(default=None, compare=False)

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels)
        if self.pixels.ndim != 2 or self.pixels.size == 0:
            raise ValueError("pixels must be a non-empty 2-D array")
        if not np.issubdtype(self.pixels.dtype, np.integer):
            raise ValueError(f"pixels must be integer-typed, got {self.pixels.dtype}")
        if not 8 <= self.bit_depth <= 16:
            raise ValueError(f"bit depth must be in [8, 16], got {self.bit_depth}")
        if self.pixels.min() < 0 or self.pixels.max() >= (1 << self.bit_depth):
            raise ValueError(f"pixel values exceed {self.bit_depth}-bit range")
        self.pixels = self.pixels.astype(np.uint16)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def max_value(self) -> int:
        """Largest representable intensity, 2**bit_depth - 1."""
        return (1 << self.bit_depth) - 1


@dataclass(eq=False)
class AttentionMap:
    """Non-negative per-pixel saliency, possibly coarser than the image."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float32)
        if self.values.ndim != 2 or self.values.size == 0:
            raise ValueError("values must be a non-empty 2-D array")
        if not np.isfinite(self.values).all():
            raise NonFiniteValue("attention values must be finite")
        if self.values.min() < 0:
            raise ValueError("attention values must be non-negative")

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


@dataclass(eq=False)
class ForegroundMask:
    """Binary raster marking the scanned organ."""

    bits: np.ndarray

    def __post_init__(self):
        self.bits = np.asarray(self.bits)
        if self.bits.ndim != 2 or self.bits.size == 0:
            raise ValueError("bits must be a non-empty 2-D array")
        self.bits = self.bits.astype(bool)

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    def count(self) -> int:
        return int(self.bits.sum())


@dataclass(eq=False)
class Histogram:
    """Intensity counts over all 2**bit_depth levels."""

    counts: np.ndarray
    bit_depth: int

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.ndim != 1 or len(self.counts) != (1 << self.bit_depth):
            raise ValueError("counts must have exactly 2**bit_depth entries")
        if self.counts.min() < 0:
            raise ValueError("counts must be non-negative")

    @property
    def total(self) -> int:
        return int(self.counts.sum())


# ---------------------------------------------------------------------------
# image containers


def load_image(path, bit_depth: int | None = None) -> Radiograph:
    """Load an 8/16-bit single-channel PNG or binary PGM.

    ``bit_depth`` overrides the container's implied depth, for data captured
    at a narrower range than its container (e.g. 12-bit data in 16-bit PNG).
    """
    path = Path(path)
    try:
        with path.open("rb") as fh:
            head = fh.read(8)
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if head.startswith(_PNG_MAGIC):
        pixels, container_depth = _load_png(path)
    elif head.startswith(b"P5"):
        pixels, container_depth = _load_pgm(path)
    elif head.startswith(b"P6"):
        raise ColorImageRejected(f"{path}: P6 is a color format")
    elif head[:2] in (b"P1", b"P2", b"P3", b"P4"):
        raise UnsupportedFormat(f"{path}: only binary (P5) PGM is supported")
    else:
        raise UnsupportedFormat(f"{path}: not a PNG or binary PGM file")

    depth = container_depth
    if bit_depth is not None:
        if not 8 <= bit_depth <= 16:
            raise ValueError(f"bit depth override must be in [8, 16], got {bit_depth}")
        if pixels.size and int(pixels.max()) >= (1 << bit_depth):
            raise ValueError(
                f"{path}: payload exceeds the {bit_depth}-bit override range"
            )
        depth = bit_depth
    return Radiograph(pixels=pixels, bit_depth=depth, source=path)


def _load_png(path: Path) -> tuple[np.ndarray, int]:
    try:
        with Image.open(path) as im:
            mode = im.mode
            if mode in _COLOR_MODES:
                raise ColorImageRejected(f"{path}: multi-channel image (mode {mode})")
            if mode == "L":
                depth = 8
            elif mode in ("I;16", "I;16B", "I;16L"):
                depth = 16
            else:
                raise UnsupportedFormat(
                    f"{path}: unsupported PNG sample depth (mode {mode})"
                )
            pixels = np.asarray(im)
    except UnidentifiedImageError as exc:
        raise CorruptFile(f"{path}: {exc}") from exc
    except (OSError, SyntaxError) as exc:
        raise CorruptFile(f"{path}: {exc}") from exc
    return pixels.astype(np.uint16), depth


def _load_pgm(path: Path) -> tuple[np.ndarray, int]:
    data = path.read_bytes()
    pos = 2  # past "P5"

    def next_token():
        nonlocal pos
        while pos < len(data):
            c = data[pos : pos + 1]
            if c == b"#":  # comment to end of line
                while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                    pos += 1
            elif c.isspace():
                pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise CorruptFile(f"{path}: truncated PGM header")
        return data[start:pos]

    try:
        width = int(next_token())
        height = int(next_token())
        maxval = int(next_token())
    except (ValueError, CorruptFile) as exc:
        raise CorruptFile(f"{path}: malformed PGM header") from exc
    if width <= 0 or height <= 0:
        raise CorruptFile(f"{path}: non-positive PGM dimensions")
    if not 0 < maxval <= 65535:
        raise UnsupportedFormat(f"{path}: PGM maxval {maxval} out of range")
    pos += 1  # single whitespace after maxval
    two_byte = maxval > 255
    need = width * height * (2 if two_byte else 1)
    payload = data[pos : pos + need]
    if len(payload) < need:
        raise CorruptFile(f"{path}: PGM payload shorter than header promises")
    dtype = ">u2" if two_byte else np.uint8
    pixels = np.frombuffer(payload, dtype=dtype).reshape(height, width)
    depth = max(8, maxval.bit_length())
    return pixels.astype(np.uint16), depth


def write_image(raster: Radiograph, path) -> None:
    """Write a raster as PNG or binary PGM, chosen by file extension.

    8-bit rasters go into 8-bit containers; anything deeper uses a 16-bit
    container (PGM additionally records the exact maxval ``2**b - 1``).
    """
    path = Path(path)
    suffix = path.suffix.lower()
    try:
        if suffix == ".png":
            if raster.bit_depth == 8:
                Image.fromarray(raster.pixels.astype(np.uint8)).save(path, format="PNG")
            else:
                Image.fromarray(raster.pixels.astype(np.uint16)).save(path, format="PNG")
        elif suffix == ".pgm":
            _write_pgm(raster, path)
        else:
            raise UnsupportedFormat(f"{path}: use a .png or .pgm extension")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _write_pgm(raster: Radiograph, path: Path) -> None:
    maxval = raster.max_value
    header = f"P5\n{raster.width} {raster.height}\n{maxval}\n".encode("ascii")
    if maxval > 255:
        body = raster.pixels.astype(">u2").tobytes()
    else:
        body = raster.pixels.astype(np.uint8).tobytes()
    path.write_bytes(header + body)


# ---------------------------------------------------------------------------
# intensity-domain helpers


def naive_8bit(image: Radiograph) -> Radiograph:
    """Rescale to 8 bits: round(v / (2**b - 1) * 255), monotone in v."""
    scaled = image.pixels.astype(np.float64) * 255.0 / image.max_value
    out = round_half_up(scaled).astype(np.uint16)
    return Radiograph(pixels=out, bit_depth=8, source=image.source)


def compute_histogram(image: Radiograph, mask: ForegroundMask | None = None) -> Histogram:
    """Count pixel intensities, optionally restricted to a mask."""
    if mask is not None:
        if mask.bits.shape != image.pixels.shape:
            raise DimensionMismatch(
                f"mask {mask.bits.shape} vs image {image.pixels.shape}"
            )
        values = image.pixels[mask.bits]
    else:
        values = image.pixels.ravel()
    counts = np.bincount(values, minlength=1 << image.bit_depth)
    return Histogram(counts=counts, bit_depth=image.bit_depth)


def write_histogram_csv(hist: Histogram, path) -> None:
    """Export a histogram as ``value,count`` CSV."""
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["value", "count"])
            for value, count in enumerate(hist.counts):
                writer.writerow([value, int(count)])
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# ATTN interchange format
#
# magic "ATTN", version 0x01, u32-LE width, u32-LE height, then
# width*height IEEE-754 32-bit LE floats, row-major.


def read_attn(path) -> AttentionMap:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if len(data) < 5 or data[:4] != _ATTN_MAGIC or data[4] != _ATTN_VERSION:
        raise BadMagic(f"{path}: not an ATTN v1 file")
    if len(data) < 13:
        raise TruncatedFile(f"{path}: header cut short")
    width, height = struct.unpack_from("<II", data, 5)
    if width == 0 or height == 0:
        raise CorruptFile(f"{path}: zero dimension")
    need = 13 + 4 * width * height
    if len(data) < need:
        raise TruncatedFile(f"{path}: expected {need} bytes, got {len(data)}")
    values = np.frombuffer(data, dtype="<f4", count=width * height, offset=13)
    if not np.isfinite(values).all():
        raise NonFiniteValue(f"{path}: NaN or Inf in attention payload")
    return AttentionMap(values=values.reshape(height, width).copy())


def write_attn(amap: AttentionMap, path) -> None:
    header = _ATTN_MAGIC + bytes([_ATTN_VERSION]) + struct.pack("<II", amap.width, amap.height)
    payload = amap.values.astype("<f4", copy=False).tobytes()
    try:
        Path(path).write_bytes(header + payload)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
